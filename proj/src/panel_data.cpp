#include "ews/panel_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "ews/error.hpp"
#include "ews/stats.hpp"

namespace ews {

namespace {

constexpr std::array<std::string_view, kNumIndicators> kIndicatorNames = {
    "gdp_growth",        "inflation",
    "fx_change",         "volatility_index",
    "liquidity_score",   "ict_demand",
    "digital_switch_usage", "iot_device_density",
    "cyber_incident_count", "sme_finance_score",
    "household_borrowing_rate", "disaster_impact",
    "emergency_policy_score", "disaster_severity_score",
};

constexpr std::array<std::string_view, 3> kLevelNames = {"Low", "Medium", "High"};

bool same_cell(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

double quantize6(double x) { return std::round(x * 1e6) / 1e6; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

std::string_view indicator_name(Indicator indicator) {
  return kIndicatorNames[static_cast<int>(indicator)];
}

std::optional<Indicator> indicator_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumIndicators; ++i) {
    if (kIndicatorNames[i] == name) return static_cast<Indicator>(i);
  }
  return std::nullopt;
}

bool is_count_indicator(Indicator indicator) {
  return indicator == Indicator::kCyberIncidentCount;
}

std::optional<double> indicator_lower_bound(Indicator indicator) {
  switch (indicator) {
    case Indicator::kGdpGrowth:
    case Indicator::kInflation:
    case Indicator::kFxChange:
      return std::nullopt;
    default:
      return 0.0;
  }
}

std::optional<double> indicator_upper_bound(Indicator indicator) {
  switch (indicator) {
    case Indicator::kLiquidityScore:
    case Indicator::kIctDemand:
    case Indicator::kDigitalSwitchUsage:
    case Indicator::kSmeFinanceScore:
    case Indicator::kEmergencyPolicyScore:
      return 100.0;
    default:
      return std::nullopt;
  }
}

std::string_view level_name(Level level) { return kLevelNames[static_cast<int>(level)]; }

Level parse_level(std::string_view text) {
  for (int i = 0; i < 3; ++i) {
    if (kLevelNames[i] == text) return static_cast<Level>(i);
  }
  throw Error(ErrorCode::kEncoding, "unknown level '" + std::string(text) +
                                        "' (expected Low, Medium or High)");
}

bool HouseholdRecord::operator==(const HouseholdRecord& other) const {
  if (household_id != other.household_id || round != other.round ||
      disaster_level != other.disaster_level || distress_label != other.distress_label ||
      severity_label != other.severity_label) {
    return false;
  }
  for (std::size_t i = 0; i < kNumIndicators; ++i) {
    if (!same_cell(indicators[i], other.indicators[i])) return false;
  }
  return true;
}

std::vector<int> PanelDataset::rounds() const {
  std::set<int> seen;
  for (const auto& r : records) seen.insert(r.round);
  return {seen.begin(), seen.end()};
}

int PanelDataset::max_round() const {
  int top = 0;
  for (const auto& r : records) top = std::max(top, r.round);
  return top;
}

void validate(const PanelDataset& data) {
  std::map<std::int64_t, std::set<int>> rounds_by_household;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& rec = data.records[i];
    if (rec.household_id < 1) {
      throw Error(ErrorCode::kIntegrity,
                  "household_id must be >= 1 (row " + std::to_string(i + 1) + ")");
    }
    if (rec.round < 1) {
      throw Error(ErrorCode::kIntegrity, "round must be >= 1 (household " +
                                             std::to_string(rec.household_id) + ")");
    }
    if (i > 0) {
      const auto& prev = data.records[i - 1];
      if (prev.household_id == rec.household_id && prev.round == rec.round) {
        throw Error(ErrorCode::kIntegrity, "duplicate key: household " +
                                               std::to_string(rec.household_id) + ", round " +
                                               std::to_string(rec.round));
      }
      if (std::pair(prev.household_id, prev.round) > std::pair(rec.household_id, rec.round)) {
        throw Error(ErrorCode::kIntegrity, "records not sorted by (household_id, round)");
      }
    }
    if (rec.distress_label != 0 && rec.distress_label != 1) {
      throw Error(ErrorCode::kIntegrity, "distress_label must be 0 or 1");
    }
    for (std::size_t k = 0; k < kNumIndicators; ++k) {
      const double v = rec.indicators[k];
      if (std::isnan(v)) continue;
      const auto ind = static_cast<Indicator>(k);
      const auto lo = indicator_lower_bound(ind);
      const auto hi = indicator_upper_bound(ind);
      if (!std::isfinite(v) || (lo && v < *lo) || (hi && v > *hi)) {
        throw Error(ErrorCode::kDomain, std::string(indicator_name(ind)) +
                                            " out of range for household " +
                                            std::to_string(rec.household_id) + ", round " +
                                            std::to_string(rec.round));
      }
    }
    rounds_by_household[rec.household_id].insert(rec.round);
  }
  for (const auto& [household, rounds] : rounds_by_household) {
    for (int r : rounds) {
      if (r > 1 && !rounds.contains(r - 1)) {
        throw Error(ErrorCode::kIntegrity, "unbalanced panel: household " +
                                               std::to_string(household) + " has round " +
                                               std::to_string(r) + " but not round " +
                                               std::to_string(r - 1));
      }
    }
  }
}

PanelDataset make_panel(std::vector<HouseholdRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::pair(a.household_id, a.round) < std::pair(b.household_id, b.round);
  });
  PanelDataset out;
  out.records = std::move(records);
  validate(out);
  return out;
}

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
  if (n_households < 10) fail("n_households must be >= 10");
  if (n_rounds < 2) fail("n_rounds must be >= 2");
  if (!(prevalence_target > 0.05 && prevalence_target < 0.5)) {
    fail("prevalence_target must lie in (0.05, 0.5)");
  }
  if (!(binary_signal_strength >= 0.0)) fail("binary_signal_strength must be >= 0");
  if (!(drift_rotation >= 0.0 && drift_rotation <= 1.0)) {
    fail("drift_rotation must lie in [0, 1]");
  }
  if (!(severity_noise_sd >= 0.0)) fail("severity_noise_sd must be >= 0");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0)) {
    fail("missing_fraction must lie in [0, 1)");
  }
}

std::vector<SeverityDriver> severity_drivers() {
  return {
      {Indicator::kDisasterImpact, 1.0, true},
      {Indicator::kVolatilityIndex, 0.5, true},
      {Indicator::kEmergencyPolicyScore, -0.5, true},
      {Indicator::kHouseholdBorrowingRate, 0.06, false},
      {Indicator::kInflation, 0.04, false},
  };
}

namespace {

// Latent standard-normal draws behind every indicator of one (household, round).
struct Latent {
  std::array<double, kNumIndicators> z{};
  double severity_shock = 0.0;
};

constexpr double kPersistence = 0.5;     // share of latent variance fixed per household
constexpr double kMacroLoading = 0.7;    // loading on the shared macro factor
constexpr double kLevelLow = -0.5244005127080407;   // N(0,1) 30% quantile
constexpr double kLevelHigh = 0.8416212335729143;   // N(0,1) 80% quantile

// Distress coefficient vector for a round: a unit vector precessing around the
// disaster-impact axis (axis component 0.5). At drift_rotation 1 consecutive
// rounds sit 120 degrees apart on the cone, so their inner product is -0.125.
std::array<double, kNumIndicators> distress_coefficients(int round, double drift_rotation) {
  std::array<double, kNumIndicators> p{}, q{}, beta{};
  auto at = [](std::array<double, kNumIndicators>& v, Indicator i) -> double& {
    return v[static_cast<int>(i)];
  };
  at(p, Indicator::kVolatilityIndex) = 0.5;
  at(p, Indicator::kIotDeviceDensity) = 0.5;
  at(p, Indicator::kEmergencyPolicyScore) = -0.5;
  at(p, Indicator::kSmeFinanceScore) = -0.5;
  at(q, Indicator::kInflation) = 0.5;
  at(q, Indicator::kHouseholdBorrowingRate) = 0.5;
  at(q, Indicator::kLiquidityScore) = -0.5;
  at(q, Indicator::kIctDemand) = -0.5;

  const double axis = 0.5;
  const double radius = std::sqrt(1.0 - axis * axis);
  const double phase = drift_rotation * (2.0 * std::numbers::pi / 3.0) * (round - 1);
  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    beta[k] = radius * (std::cos(phase) * p[k] + std::sin(phase) * q[k]);
  }
  at(beta, Indicator::kDisasterImpact) = axis;
  return beta;
}

constexpr double kQuartile = 0.6744897501960817;  // N(0,1) 75% quantile

int quartile_level(double z) { return (z > -kQuartile) + (z > 0.0) + (z > kQuartile); }

// Midpoint of the 0.5-spaced index lattice whose lower share is closest to `share`.
double lattice_cut(const std::vector<double>& index, double share) {
  const auto [lo, hi] = std::minmax_element(index.begin(), index.end());
  double best = 0.0, best_err = std::numeric_limits<double>::infinity();
  for (double cut = std::floor(*lo * 2.0) / 2.0 + 0.25; cut < *hi; cut += 0.5) {
    const auto below = std::count_if(index.begin(), index.end(), [&](double v) { return v <= cut; });
    const double err = std::abs(static_cast<double>(below) / static_cast<double>(index.size()) - share);
    if (err < best_err) {
      best_err = err;
      best = cut;
    }
  }
  return best;
}

// Intercept that makes the mean distress probability equal `target`.
double solve_intercept(const std::vector<double>& scores, double target) {
  auto prevalence = [&](double b) {
    double s = 0.0;
    for (double x : scores) s += sigmoid(b + x);
    return s / static_cast<double>(scores.size());
  };
  double lo = -30.0, hi = 30.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (prevalence(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PanelDataset generate_synthetic(const GeneratorConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int n_h = config.n_households;
  const int n_r = config.n_rounds;

  // Round-level macro draws, scaled per household by an exposure factor.
  struct MacroLevel {
    double gdp, inflation, fx;
  };
  std::vector<MacroLevel> round_levels(n_r);
  for (int r = 0; r < n_r; ++r) {
    round_levels[r] = {2.5 + 0.3 * normal(rng), 6.0 + 0.5 * normal(rng),
                       1.0 + 0.5 * normal(rng)};
  }

  const double keep = std::sqrt(kPersistence);
  const double fresh = std::sqrt(1.0 - kPersistence);
  const double idio = std::sqrt(1.0 - kMacroLoading * kMacroLoading);

  std::vector<HouseholdRecord> records;
  records.reserve(static_cast<std::size_t>(n_h) * n_r);
  std::vector<Latent> latents;
  latents.reserve(records.capacity());

  for (int h = 0; h < n_h; ++h) {
    std::array<double, kNumIndicators> persistent{};
    for (double& v : persistent) v = normal(rng);
    const double macro_persistent = normal(rng);
    const double severity_persistent = normal(rng);
    std::array<double, 3> exposure{};
    for (double& e : exposure) e = std::max(0.3, 1.0 + 0.1 * normal(rng));

    for (int r = 0; r < n_r; ++r) {
      Latent lat;
      for (std::size_t k = 0; k < kNumIndicators; ++k) {
        lat.z[k] = keep * persistent[k] + fresh * normal(rng);
      }
      const double macro = keep * macro_persistent + fresh * normal(rng);
      for (Indicator i : {Indicator::kGdpGrowth, Indicator::kInflation, Indicator::kFxChange}) {
        auto& z = lat.z[static_cast<int>(i)];
        z = kMacroLoading * macro + idio * z;
      }
      const double severity_noise = keep * severity_persistent + fresh * normal(rng);

      HouseholdRecord rec;
      rec.household_id = h + 1;
      rec.round = r + 1;
      auto z = [&](Indicator i) { return lat.z[static_cast<int>(i)]; };
      auto set = [&](Indicator i, double v) { rec.value(i) = quantize6(v); };
      const auto& lvl = round_levels[r];

      set(Indicator::kGdpGrowth, lvl.gdp * exposure[0] + 1.5 * z(Indicator::kGdpGrowth));
      set(Indicator::kInflation, lvl.inflation * exposure[1] + 2.0 * z(Indicator::kInflation));
      set(Indicator::kFxChange, lvl.fx * exposure[2] + 3.0 * z(Indicator::kFxChange));
      set(Indicator::kVolatilityIndex, std::max(0.0, 20.0 + 5.0 * z(Indicator::kVolatilityIndex)));
      set(Indicator::kLiquidityScore,
          std::clamp(50.0 + 15.0 * z(Indicator::kLiquidityScore), 0.0, 100.0));
      set(Indicator::kIctDemand, 100.0 * normal_cdf(z(Indicator::kIctDemand)));
      set(Indicator::kDigitalSwitchUsage,
          std::clamp(55.0 + 15.0 * z(Indicator::kDigitalSwitchUsage), 0.0, 100.0));
      set(Indicator::kIotDeviceDensity, std::exp(0.7 + 0.35 * z(Indicator::kIotDeviceDensity)));
      {
        std::poisson_distribution<int> pois(std::exp(-0.3 + 0.6 * z(Indicator::kCyberIncidentCount)));
        rec.value(Indicator::kCyberIncidentCount) = static_cast<double>(pois(rng));
      }
      set(Indicator::kSmeFinanceScore,
          std::clamp(50.0 + 15.0 * z(Indicator::kSmeFinanceScore), 0.0, 100.0));
      set(Indicator::kHouseholdBorrowingRate,
          std::exp(std::log(8.0) + 0.5 * z(Indicator::kHouseholdBorrowingRate)));
      set(Indicator::kDisasterImpact, std::exp(0.75 * z(Indicator::kDisasterImpact)));
      set(Indicator::kEmergencyPolicyScore,
          100.0 * normal_cdf(z(Indicator::kEmergencyPolicyScore)));

      // Disaster severity shares the disaster-impact latent.
      auto& sev_z = lat.z[static_cast<int>(Indicator::kDisasterSeverityScore)];
      sev_z = 0.8 * z(Indicator::kDisasterImpact) + 0.6 * sev_z;
      set(Indicator::kDisasterSeverityScore, std::exp(0.2 + 0.6 * sev_z));
      rec.disaster_level = sev_z < kLevelLow    ? Level::kLow
                           : sev_z < kLevelHigh ? Level::kMedium
                                                       : Level::kHigh;

      lat.severity_shock = severity_noise;
      records.push_back(rec);
      latents.push_back(lat);
    }
  }

  // Severity: index over the drivers plus noise. The stepped terms put the
  // index near a lattice of spacing 0.5; each cut sits on the lattice midpoint
  // whose class share is closest to 30% / 80%.
  const auto drivers = severity_drivers();
  std::vector<double> index(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    double s = config.severity_noise_sd * latents[i].severity_shock;
    for (const auto& d : drivers) {
      const double z = latents[i].z[static_cast<int>(d.indicator)];
      s += d.weight * (d.quartile_level ? quartile_level(z) : z);
    }
    index[i] = s;
  }
  const double cut_low = lattice_cut(index, 0.3);
  const double cut_high = lattice_cut(index, 0.8);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].severity_label = index[i] <= cut_low    ? Level::kLow
                                : index[i] <= cut_high ? Level::kMedium
                                                       : Level::kHigh;
  }

  // Distress: Bernoulli with round-specific coefficient vectors; the intercept
  // of each round is solved so the expected prevalence hits the target.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 1; r <= n_r; ++r) {
    const auto beta = distress_coefficients(r, config.drift_rotation);
    std::vector<std::size_t> rows;
    std::vector<double> scores;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].round != r) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < kNumIndicators; ++k) s += beta[k] * latents[i].z[k];
      rows.push_back(i);
      scores.push_back(config.binary_signal_strength * s);
    }
    const double intercept = solve_intercept(scores, config.prevalence_target);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      records[rows[j]].distress_label = unit(rng) < sigmoid(intercept + scores[j]) ? 1 : 0;
    }
  }

  if (config.missing_fraction > 0.0) {
    std::mt19937_64 mask_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    for (auto& rec : records) {
      for (auto& v : rec.indicators) {
        if (unit(mask_rng) < config.missing_fraction) v = std::nan("");
      }
    }
  }

  return make_panel(std::move(records));
}

// ---------------------------------------------------------------------------
// CSV

std::string panel_csv_header() {
  std::string header = "household_id,round";
  for (auto name : kIndicatorNames) {
    header += ',';
    header += name;
  }
  header += ",disaster_level,distress_label,severity_label";
  return header;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void cell_error(std::size_t line_no, std::string_view column, std::string_view cell) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ", column '" +
                                     std::string(column) + "': cannot parse '" +
                                     std::string(cell) + "'");
}

template <typename T>
T parse_number(std::string_view cell, std::size_t line_no, std::string_view column) {
  T value{};
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) cell_error(line_no, column, cell);
  return value;
}

void append_real(std::string& out, double v) {
  if (std::isnan(v)) return;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  out += buf;
}

}  // namespace

PanelDataset parse_panel_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      auto line = text.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = nl + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::kSchema, "empty panel file (no header)");

  const std::string canonical = panel_csv_header();
  const auto expected = split_fields(canonical);
  const auto header = split_fields(lines[0]);
  std::vector<std::string> missing;
  for (auto name : expected) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      missing.emplace_back(name);
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorCode::kSchema, msg);
  }
  // Column position of each canonical field.
  std::vector<std::size_t> pos(expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    pos[i] = static_cast<std::size_t>(
        std::find(header.begin(), header.end(), expected[i]) - header.begin());
  }

  std::vector<HouseholdRecord> records;
  std::set<std::pair<std::int64_t, int>> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const std::size_t line_no = li + 1;
    const auto cells = split_fields(lines[li]);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields, found " +
                                         std::to_string(cells.size()));
    }
    auto cell = [&](std::size_t canonical) { return cells[pos[canonical]]; };
    HouseholdRecord rec;
    rec.household_id = parse_number<std::int64_t>(cell(0), line_no, expected[0]);
    rec.round = parse_number<int>(cell(1), line_no, expected[1]);
    for (std::size_t k = 0; k < kNumIndicators; ++k) {
      const auto c = cell(2 + k);
      rec.indicators[k] = c.empty() ? std::nan("") : parse_number<double>(c, line_no, expected[2 + k]);
    }
    const std::size_t level_col = 2 + kNumIndicators;
    try {
      if (!cell(level_col).empty()) rec.disaster_level = parse_level(cell(level_col));
      rec.severity_label = parse_level(cell(level_col + 2));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    rec.distress_label = parse_number<int>(cell(level_col + 1), line_no, expected[level_col + 1]);
    if (!seen.emplace(rec.household_id, rec.round).second) {
      throw Error(ErrorCode::kIntegrity, "duplicate key: household " +
                                             std::to_string(rec.household_id) + ", round " +
                                             std::to_string(rec.round));
    }
    records.push_back(rec);
  }
  return make_panel(std::move(records));
}

PanelDataset read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_panel_csv(buf.str());
}

std::string format_panel_csv(const PanelDataset& data) {
  std::string out = panel_csv_header();
  out += '\n';
  for (const auto& rec : data.records) {
    out += std::to_string(rec.household_id);
    out += ',';
    out += std::to_string(rec.round);
    for (std::size_t k = 0; k < kNumIndicators; ++k) {
      out += ',';
      const double v = rec.indicators[k];
      if (is_count_indicator(static_cast<Indicator>(k)) && !std::isnan(v)) {
        out += std::to_string(static_cast<long long>(v));
      } else {
        append_real(out, v);
      }
    }
    out += ',';
    if (rec.disaster_level) out += level_name(*rec.disaster_level);
    out += ',';
    out += std::to_string(rec.distress_label);
    out += ',';
    out += level_name(rec.severity_label);
    out += '\n';
  }
  return out;
}

void write_panel_csv(const PanelDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << format_panel_csv(data);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// EDA

std::optional<double> EdaSummary::correlation_between(std::string_view a,
                                                      std::string_view b) const {
  const auto ia = std::find(correlation_columns.begin(), correlation_columns.end(), a);
  const auto ib = std::find(correlation_columns.begin(), correlation_columns.end(), b);
  if (ia == correlation_columns.end() || ib == correlation_columns.end()) {
    throw Error(ErrorCode::kSchema, "no correlation column named " + std::string(a) + " / " +
                                        std::string(b));
  }
  return correlation[ia - correlation_columns.begin()][ib - correlation_columns.begin()];
}

EdaSummary summarize(const PanelDataset& data) {
  if (data.records.empty()) throw Error(ErrorCode::kDomain, "summarize: empty dataset");
  EdaSummary out;

  std::vector<std::vector<double>> columns;
  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    std::vector<double> col;
    col.reserve(data.size());
    for (const auto& rec : data.records) col.push_back(rec.indicators[k]);
    columns.push_back(std::move(col));
    out.correlation_columns.emplace_back(kIndicatorNames[k]);
  }
  {
    std::vector<double> distress, severity;
    for (const auto& rec : data.records) {
      distress.push_back(rec.distress_label);
      severity.push_back(static_cast<double>(rec.severity_label));
    }
    columns.push_back(std::move(distress));
    columns.push_back(std::move(severity));
    out.correlation_columns.emplace_back("distress_label");
    out.correlation_columns.emplace_back("severity_label");
  }

  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    std::vector<double> present;
    for (double v : columns[k]) {
      if (!std::isnan(v)) present.push_back(v);
    }
    NumericSummary s;
    s.name = kIndicatorNames[k];
    s.count = present.size();
    s.histogram.assign(kHistogramBins, 0);
    if (!present.empty()) {
      s.mean = mean(present);
      s.sd = sample_sd(present);
      s.skewness = skewness(present);
      s.min = *std::min_element(present.begin(), present.end());
      s.max = *std::max_element(present.begin(), present.end());
      s.histogram_lo = s.min;
      s.histogram_hi = s.max;
      const double width = (s.max - s.min) / kHistogramBins;
      for (double v : present) {
        int bin = width > 0.0 ? static_cast<int>((v - s.min) / width) : 0;
        s.histogram[std::clamp(bin, 0, kHistogramBins - 1)] += 1;
      }
    }
    out.numeric.push_back(std::move(s));
  }

  auto& disaster = out.categorical["disaster_level"];
  auto& severity = out.categorical["severity_label"];
  auto& distress = out.categorical["distress_label"];
  for (auto name : kLevelNames) {
    disaster[std::string(name)] = 0;
    severity[std::string(name)] = 0;
  }
  distress["0"] = 0;
  distress["1"] = 0;
  for (const auto& rec : data.records) {
    disaster[rec.disaster_level ? std::string(level_name(*rec.disaster_level)) : "missing"] += 1;
    severity[std::string(level_name(rec.severity_label))] += 1;
    distress[std::to_string(rec.distress_label)] += 1;
  }

  const std::size_t m = columns.size();
  out.correlation.assign(m, std::vector<std::optional<double>>(m));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (std::isnan(columns[a][i]) || std::isnan(columns[b][i])) continue;
        xs.push_back(columns[a][i]);
        ys.push_back(columns[b][i]);
      }
      std::optional<double> c = pearson(xs, ys);
      if (a == b && c) c = 1.0;
      out.correlation[a][b] = c;
      out.correlation[b][a] = c;
    }
  }
  return out;
}

}  // namespace ews
