#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ews {

// Numeric household indicators, in canonical CSV column order.
enum class Indicator : int {
  kGdpGrowth = 0,
  kInflation,
  kFxChange,
  kVolatilityIndex,
  kLiquidityScore,
  kIctDemand,
  kDigitalSwitchUsage,
  kIotDeviceDensity,
  kCyberIncidentCount,
  kSmeFinanceScore,
  kHouseholdBorrowingRate,
  kDisasterImpact,
  kEmergencyPolicyScore,
  kDisasterSeverityScore,
};

inline constexpr std::size_t kNumIndicators = 14;

std::string_view indicator_name(Indicator indicator);
std::optional<Indicator> indicator_from_name(std::string_view name);
// Integer-valued indicators (written without decimals).
bool is_count_indicator(Indicator indicator);
// Lower bound of the valid domain, if any (all bounded indicators are >= 0).
std::optional<double> indicator_lower_bound(Indicator indicator);
std::optional<double> indicator_upper_bound(Indicator indicator);

enum class Level : int { kLow = 0, kMedium = 1, kHigh = 2 };

std::string_view level_name(Level level);
// Throws ErrorCode::kEncoding for anything other than Low/Medium/High.
Level parse_level(std::string_view text);

struct HouseholdRecord {
  std::int64_t household_id = 0;
  int round = 0;
  // Missing cells are NaN.
  std::array<double, kNumIndicators> indicators{};
  std::optional<Level> disaster_level;
  int distress_label = 0;
  Level severity_label = Level::kLow;

  double value(Indicator indicator) const { return indicators[static_cast<int>(indicator)]; }
  double& value(Indicator indicator) { return indicators[static_cast<int>(indicator)]; }

  // NaN cells compare equal to NaN cells.
  bool operator==(const HouseholdRecord& other) const;
};

inline constexpr std::string_view kPanelSchemaVersion = "ews-panel/1";

struct PanelDataset {
  std::vector<HouseholdRecord> records;  // sorted by (household_id, round)
  std::string schema_version{kPanelSchemaVersion};

  bool operator==(const PanelDataset&) const = default;

  std::size_t size() const noexcept { return records.size(); }
  std::vector<int> rounds() const;
  int max_round() const;
};

// Checks sort order, key uniqueness, balance, and value domains; throws
// ErrorCode::kIntegrity (or kDomain for out-of-range values) otherwise.
void validate(const PanelDataset& data);
// Sorts by key and validates.
PanelDataset make_panel(std::vector<HouseholdRecord> records);

struct GeneratorConfig {
  std::uint64_t seed = 42;
  int n_households = 750;
  int n_rounds = 3;
  // Scale of the distress log-odds in units of the standardized latent score.
  double binary_signal_strength = 2.2;
  // Precession of the distress coefficient vector between consecutive rounds,
  // as a fraction of the angle that makes consecutive rounds orthogonal.
  double drift_rotation = 1.0;
  double severity_noise_sd = 0.03;
  double prevalence_target = 0.27;
  // Fraction of indicator cells masked as missing.
  double missing_fraction = 0.0;

  // Throws ErrorCode::kConfig naming the violated bound.
  void validate() const;
};

// One term of the latent severity index. Major drivers enter through their
// quartile level (0..3 of the standard-normal latent), minor ones linearly.
struct SeverityDriver {
  Indicator indicator;
  double weight;
  bool quartile_level;
};

// Ground-truth severity drivers, largest |weight| first.
std::vector<SeverityDriver> severity_drivers();

PanelDataset generate_synthetic(const GeneratorConfig& config);

std::string panel_csv_header();
PanelDataset read_panel_csv(const std::filesystem::path& path);
PanelDataset parse_panel_csv(std::string_view text);
void write_panel_csv(const PanelDataset& data, const std::filesystem::path& path);
std::string format_panel_csv(const PanelDataset& data);

struct NumericSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;  // non-missing cells
  double histogram_lo = 0.0;
  double histogram_hi = 0.0;
  std::vector<std::size_t> histogram;  // 20 equal-width bins over [min, max]
};

struct EdaSummary {
  std::vector<NumericSummary> numeric;
  std::map<std::string, std::map<std::string, std::size_t>> categorical;
  // Numeric columns followed by distress_label (0/1) and severity_label (0/1/2).
  std::vector<std::string> correlation_columns;
  // nullopt marks an undefined correlation (zero variance).
  std::vector<std::vector<std::optional<double>>> correlation;

  std::optional<double> correlation_between(std::string_view a, std::string_view b) const;
};

inline constexpr int kHistogramBins = 20;

EdaSummary summarize(const PanelDataset& data);

}  // namespace ews
