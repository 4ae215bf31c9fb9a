#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ews/eval.hpp"
#include "ews/features.hpp"
#include "ews/models.hpp"
#include "ews/panel_data.hpp"

namespace ews {

enum class ShockMode { kAdditiveSd, kMultiplicative };
enum class ShockDirection { kUp, kDown, kRandomSign };

const char* shock_mode_name(ShockMode mode);
const char* shock_direction_name(ShockDirection direction);
ShockMode parse_shock_mode(const std::string& text);             // kConfig on failure
ShockDirection parse_shock_direction(const std::string& text);   // kConfig on failure

struct ShockSpec {
  std::vector<std::string> target_columns{"inflation", "gdp_growth", "cyber_incident_count",
                                          "household_borrowing_rate"};
  ShockMode mode = ShockMode::kAdditiveSd;
  double magnitude = 1.0;  // training sds (additive) or relative change (multiplicative)
  std::uint64_t seed = 44;
  ShockDirection direction = ShockDirection::kRandomSign;

  // kSchema for unknown columns, kType for categorical ones, kConfig for a
  // negative or non-finite magnitude.
  void validate() const;
};

// Shocked copy of `data`: cells of the target columns in `rounds` move by
// magnitude x training sd x sign (additive) or scale by 1 + magnitude x sign
// (multiplicative). Signs are drawn per cell from the seeded stream in record
// order. Counts are re-rounded to nonnegative integers and bounded columns
// clamped to their domain; missing cells stay missing.
PanelDataset apply_shock(const PanelDataset& data, const std::set<int>& rounds,
                         const ShockSpec& spec, const TransformState& state);

struct StressReport {
  std::string model;
  Target target = Target::kBinary;
  std::set<int> rounds;
  ShockSpec spec;
  std::map<std::string, double> original;
  std::map<std::string, double> shocked;
  std::map<std::string, double> deltas;  // shocked - original
};

// Scalar metrics of one evaluation: roc_auc, pr_auc, brier, log_loss
// (binary) or accuracy, macro_f1 (severity).
std::map<std::string, double> scalar_metrics(const Model& model, const FeatureMatrix& rows,
                                             Target target);

// Evaluates the frozen model on the rows of `rounds` before and after the
// shock; both sides are featurized from raw values through `state`. With
// `csv_precision`, features are rounded as a feature CSV export would round
// them, matching models trained from exported files.
StressReport run_stress(const Model& model, const std::string& model_name, Target target,
                        const PanelDataset& data, const std::set<int>& rounds,
                        const ShockSpec& spec, const TransformState& state,
                        bool csv_precision = false);

// Population Stability Index of `current` against decile bins of
// `reference`; NaNs are ignored. Throws kDomain for empty input.
double psi(std::span<const double> reference, std::span<const double> current);
// sum (c - r) ln(c / r) with both proportions floored at 1e-4.
double psi_from_proportions(std::span<const double> reference, std::span<const double> current);
// Interior bin edges: distinct reference deciles below the reference maximum.
std::vector<double> psi_edges(std::span<const double> reference);

struct DriftReport {
  double threshold = 0.25;
  std::vector<std::pair<std::string, double>> psi;  // canonical indicator order
  std::vector<std::string> flagged;
  bool retrain_recommended = false;
};

// PSI of every raw indicator; flags those with PSI > threshold.
DriftReport drift_check(std::span<const HouseholdRecord> reference,
                        std::span<const HouseholdRecord> incoming, double threshold = 0.25);

// Records of `data` whose round is in `rounds`.
std::vector<HouseholdRecord> records_in_rounds(const PanelDataset& data, const std::set<int>& rounds);

}  // namespace ews
