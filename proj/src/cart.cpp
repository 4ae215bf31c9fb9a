#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ews/error.hpp"
#include "ews/models.hpp"
#include "model_util.hpp"
#include "tree_grower.hpp"

namespace ews {

namespace {

constexpr int kMaxClasses = 8;

struct GiniCriterion {
  struct Stats {
    std::array<double, kMaxClasses> counts{};
    double total = 0.0;
  };

  std::span<const int> labels;
  int n_classes;

  Stats empty() const { return {}; }
  void add(Stats& s, int row, double weight) const {
    s.counts[labels[row]] += weight;
    s.total += weight;
  }
  Stats minus(const Stats& a, const Stats& b) const {
    Stats out;
    for (int k = 0; k < n_classes; ++k) out.counts[k] = a.counts[k] - b.counts[k];
    out.total = a.total - b.total;
    return out;
  }
  double cover(const Stats& s) const { return s.total; }
  bool is_pure(const Stats& s) const {
    int nonzero = 0;
    for (int k = 0; k < n_classes; ++k) nonzero += s.counts[k] > 0.0;
    return nonzero <= 1;
  }
  double impurity(const Stats& s) const {
    return gini_impurity(std::span<const double>(s.counts.data(), n_classes));
  }
  double parent_score(const Stats& parent) const { return impurity(parent); }
  double gain(double parent_score, const Stats& parent, const Stats& l, const Stats& r) const {
    if (l.total <= 0.0 || r.total <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return parent_score - (l.total / parent.total) * impurity(l) -
           (r.total / parent.total) * impurity(r);
  }
  std::vector<double> leaf_value(const Stats& s) const {
    std::vector<double> v(n_classes);
    for (int k = 0; k < n_classes; ++k) v[k] = s.counts[k] / s.total;
    return v;
  }
};

void check_labels(std::span<const int> labels, int n_classes, std::size_t rows) {
  if (labels.size() != rows) throw Error(ErrorCode::kShape, "label count does not match rows");
  if (n_classes < 2 || n_classes > kMaxClasses) {
    throw Error(ErrorCode::kObjective, "unsupported class count " + std::to_string(n_classes));
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes) {
      throw Error(ErrorCode::kObjective, "label " + std::to_string(y) + " outside [0, " +
                                             std::to_string(n_classes) + ")");
    }
  }
}

}  // namespace

double gini_impurity(std::span<const double> class_counts) {
  double total = 0.0;
  for (double c : class_counts) total += c;
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double c : class_counts) sum_sq += (c / total) * (c / total);
  return 1.0 - sum_sq;
}

DecisionTree train_tree(const Matrix& x, std::span<const int> labels, int n_classes,
                        const TreeConfig& config, std::span<const double> weights) {
  check_labels(labels, n_classes, x.rows());
  if (x.rows() == 0) throw Error(ErrorCode::kDomain, "train_tree: no rows");
  std::vector<double> unit;
  if (weights.empty()) {
    unit.assign(x.rows(), 1.0);
    weights = unit;
  }
  const auto presort = detail::Presort::build(x);
  GiniCriterion crit{labels, n_classes};
  detail::GrowthOptions opt;
  opt.max_depth = config.max_depth;
  opt.min_gain = config.min_gain;
  opt.min_samples_split = config.min_samples_split;
  detail::TreeGrower<GiniCriterion> grower(x, presort, weights, crit, opt, nullptr);
  DecisionTree out;
  out.tree = grower.grow();
  out.n_classes = n_classes;
  out.config = config;
  out.feature_names = detail::positional_names(x.cols());
  return out;
}

DecisionTree train_tree(const FeatureMatrix& matrix, Target target, const TreeConfig& config) {
  const auto m = detail::key_ordered(matrix);
  auto out = train_tree(m.values, target_labels(m, target), n_classes_for(target), config);
  out.feature_names = m.column_names;
  return out;
}

ForestModel train_forest(const Matrix& x, std::span<const int> labels, int n_classes,
                         const ForestConfig& config) {
  check_labels(labels, n_classes, x.rows());
  if (config.n_trees < 1) throw Error(ErrorCode::kConfig, "n_trees must be >= 1");
  if (x.rows() == 0) throw Error(ErrorCode::kDomain, "train_forest: no rows");

  ForestModel out;
  out.n_classes = n_classes;
  out.bootstrap_seed = config.seed;
  out.config = config;
  out.feature_subsample =
      config.feature_subsample > 0
          ? std::min(config.feature_subsample, static_cast<int>(x.cols()))
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));

  const auto presort = detail::Presort::build(x);
  GiniCriterion crit{labels, n_classes};
  detail::GrowthOptions opt;
  opt.max_depth = config.max_depth;
  opt.min_samples_split = config.min_samples_split;
  opt.features_per_split = out.feature_subsample;

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> draw(0, x.rows() - 1);
  std::vector<double> weights(x.rows());
  for (int t = 0; t < config.n_trees; ++t) {
    if (config.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < x.rows(); ++i) weights[draw(rng)] += 1.0;
    } else {
      std::fill(weights.begin(), weights.end(), 1.0);
    }
    detail::TreeGrower<GiniCriterion> grower(x, presort, weights, crit, opt, &rng);
    out.trees.push_back(grower.grow());
  }
  out.feature_names = detail::positional_names(x.cols());
  return out;
}

ForestModel train_forest(const FeatureMatrix& matrix, Target target, const ForestConfig& config) {
  const auto m = detail::key_ordered(matrix);
  auto out = train_forest(m.values, target_labels(m, target), n_classes_for(target), config);
  out.feature_names = m.column_names;
  return out;
}

}  // namespace ews
