#include "ews/stress.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ews/error.hpp"
#include "ews/stats.hpp"

namespace ews {

const char* shock_mode_name(ShockMode mode) {
  return mode == ShockMode::kAdditiveSd ? "additive_sd" : "multiplicative";
}

const char* shock_direction_name(ShockDirection direction) {
  switch (direction) {
    case ShockDirection::kUp: return "up";
    case ShockDirection::kDown: return "down";
    case ShockDirection::kRandomSign: return "random-sign";
  }
  return "?";
}

ShockMode parse_shock_mode(const std::string& text) {
  if (text == "additive_sd") return ShockMode::kAdditiveSd;
  if (text == "multiplicative") return ShockMode::kMultiplicative;
  throw Error(ErrorCode::kConfig, "unknown shock mode '" + text + "'");
}

ShockDirection parse_shock_direction(const std::string& text) {
  if (text == "up") return ShockDirection::kUp;
  if (text == "down") return ShockDirection::kDown;
  if (text == "random-sign") return ShockDirection::kRandomSign;
  throw Error(ErrorCode::kConfig, "unknown shock direction '" + text + "'");
}

void ShockSpec::validate() const {
  for (const auto& c : target_columns) resolve_numeric_column(c);
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw Error(ErrorCode::kConfig, "shock magnitude must be finite and >= 0");
  }
}

PanelDataset apply_shock(const PanelDataset& data, const std::set<int>& rounds,
                         const ShockSpec& spec, const TransformState& state) {
  spec.validate();
  std::vector<Indicator> columns;
  for (const auto& c : spec.target_columns) columns.push_back(resolve_numeric_column(c));

  PanelDataset out = data;
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  for (auto& rec : out.records) {
    if (!rounds.contains(rec.round)) continue;
    for (Indicator ind : columns) {
      double sign = 1.0;
      if (spec.direction == ShockDirection::kRandomSign) sign = coin(rng) ? 1.0 : -1.0;
      if (spec.direction == ShockDirection::kDown) sign = -1.0;
      double& cell = rec.value(ind);
      if (std::isnan(cell) || spec.magnitude == 0.0) continue;
      if (spec.mode == ShockMode::kAdditiveSd) {
        cell += spec.magnitude * state.raw_sd[static_cast<int>(ind)] * sign;
      } else {
        cell *= 1.0 + spec.magnitude * sign;
      }
      if (is_count_indicator(ind)) cell = std::max(0.0, std::round(cell));
      if (const auto lo = indicator_lower_bound(ind)) cell = std::max(cell, *lo);
      if (const auto hi = indicator_upper_bound(ind)) cell = std::min(cell, *hi);
    }
  }
  return out;
}

std::map<std::string, double> scalar_metrics(const Model& model, const FeatureMatrix& rows,
                                             Target target) {
  if (target == Target::kBinary) {
    const auto m = binary_metrics(predict_positive(model, rows.values), rows.target_binary);
    return {{"roc_auc", m.roc_auc}, {"pr_auc", m.pr_auc}, {"brier", m.brier}, {"log_loss", m.log_loss}};
  }
  const auto m = multiclass_metrics(predict_class(model, rows.values), rows.target_severity);
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}};
}

StressReport run_stress(const Model& model, const std::string& model_name, Target target,
                        const PanelDataset& data, const std::set<int>& rounds,
                        const ShockSpec& spec, const TransformState& state,
                        bool csv_precision) {
  auto slice = [&](const PanelDataset& d) {
    auto full = build_feature_matrix(state, d);
    if (csv_precision) full = at_csv_precision(std::move(full));
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < full.rows(); ++i) {
      if (rounds.contains(full.keys[i].round)) keep.push_back(i);
    }
    return full.select(keep);
  };
  StressReport report;
  report.model = model_name;
  report.target = target;
  report.rounds = rounds;
  report.spec = spec;
  report.original = scalar_metrics(model, slice(data), target);
  report.shocked = scalar_metrics(model, slice(apply_shock(data, rounds, spec, state)), target);
  for (const auto& [name, value] : report.original) {
    report.deltas[name] = report.shocked.at(name) - value;
  }
  return report;
}

namespace {

constexpr double kProportionFloor = 1e-4;

std::vector<double> finite_values(std::span<const double> v) {
  std::vector<double> out;
  for (double x : v) {
    if (!std::isnan(x)) out.push_back(x);
  }
  return out;
}

std::vector<double> bin_proportions(std::span<const double> values, std::span<const double> edges) {
  std::vector<double> counts(edges.size() + 1, 0.0);
  for (double x : values) {
    const auto bin = std::lower_bound(edges.begin(), edges.end(), x) - edges.begin();
    counts[bin] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(values.size());
  return counts;
}

}  // namespace

std::vector<double> psi_edges(std::span<const double> reference) {
  const auto ref = finite_values(reference);
  if (ref.empty()) throw Error(ErrorCode::kDomain, "psi: empty reference");
  const double top = *std::max_element(ref.begin(), ref.end());
  std::vector<double> edges;
  for (int d = 1; d <= 9; ++d) {
    const double q = quantile(ref, d / 10.0);
    if (q < top && (edges.empty() || q > edges.back())) edges.push_back(q);
  }
  return edges;
}

double psi_from_proportions(std::span<const double> reference, std::span<const double> current) {
  if (reference.size() != current.size()) {
    throw Error(ErrorCode::kShape, "psi: proportion vectors differ in length");
  }
  if (reference.empty()) throw Error(ErrorCode::kDomain, "psi: no bins");
  double out = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double r = std::max(reference[i], kProportionFloor);
    const double c = std::max(current[i], kProportionFloor);
    out += (c - r) * std::log(c / r);
  }
  return out;
}

double psi(std::span<const double> reference, std::span<const double> current) {
  const auto edges = psi_edges(reference);
  const auto ref = finite_values(reference);
  const auto cur = finite_values(current);
  if (cur.empty()) throw Error(ErrorCode::kDomain, "psi: empty current sample");
  return psi_from_proportions(bin_proportions(ref, edges), bin_proportions(cur, edges));
}

DriftReport drift_check(std::span<const HouseholdRecord> reference,
                        std::span<const HouseholdRecord> incoming, double threshold) {
  DriftReport report;
  report.threshold = threshold;
  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    std::vector<double> ref, cur;
    for (const auto& r : reference) ref.push_back(r.indicators[k]);
    for (const auto& r : incoming) cur.push_back(r.indicators[k]);
    const std::string name(indicator_name(static_cast<Indicator>(k)));
    const double value = psi(ref, cur);
    report.psi.emplace_back(name, value);
    if (value > threshold) report.flagged.push_back(name);
  }
  report.retrain_recommended = !report.flagged.empty();
  return report;
}

std::vector<HouseholdRecord> records_in_rounds(const PanelDataset& data, const std::set<int>& rounds) {
  std::vector<HouseholdRecord> out;
  for (const auto& r : data.records) {
    if (rounds.contains(r.round)) out.push_back(r);
  }
  return out;
}

}  // namespace ews
