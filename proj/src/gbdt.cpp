#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ews/error.hpp"
#include "ews/models.hpp"
#include "model_util.hpp"
#include "tree_grower.hpp"

namespace ews {

const char* objective_name(Objective objective) {
  return objective == Objective::kBinaryLogloss ? "binary_logloss" : "softmax";
}

const char* growth_name(Growth growth) {
  return growth == Growth::kDepthWise ? "depth_wise" : "leaf_wise";
}

BoostConfig BoostConfig::depth_wise() {
  BoostConfig c;
  c.growth = Growth::kDepthWise;
  c.max_depth = 4;
  return c;
}

BoostConfig BoostConfig::leaf_wise() {
  BoostConfig c;
  c.growth = Growth::kLeafWise;
  c.max_depth = -1;
  c.max_leaves = 15;
  return c;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Second-order split statistics over per-row gradients and hessians.
struct NewtonCriterion {
  struct Stats {
    double grad = 0.0;
    double hess = 0.0;
    double count = 0.0;
  };

  std::span<const double> grad;
  std::span<const double> hess;
  double lambda;
  double min_child_weight;

  Stats empty() const { return {}; }
  void add(Stats& s, int row, double weight) const {
    s.grad += grad[row];
    s.hess += hess[row];
    s.count += weight;
  }
  Stats minus(const Stats& a, const Stats& b) const {
    return {a.grad - b.grad, a.hess - b.hess, a.count - b.count};
  }
  double cover(const Stats& s) const { return s.count; }
  bool is_pure(const Stats&) const { return false; }
  double score(const Stats& s) const { return s.grad * s.grad / (s.hess + lambda); }
  double parent_score(const Stats& parent) const { return score(parent); }
  double gain(double parent_score, const Stats&, const Stats& l, const Stats& r) const {
    if (l.hess < min_child_weight || r.hess < min_child_weight) return kNaN;
    return 0.5 * (score(l) + score(r) - parent_score);
  }
  std::vector<double> leaf_value(const Stats& s) const { return {-s.grad / (s.hess + lambda)}; }
};

constexpr double kProbFloor = 1e-15;

double binary_loss(std::span<const double> margin, std::span<const int> y, double pos_w) {
  double loss = 0.0, total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = y[i] == 1 ? pos_w : 1.0;
    const double p = std::clamp(sigmoid(margin[i]), kProbFloor, 1.0 - kProbFloor);
    loss -= w * (y[i] == 1 ? std::log(p) : std::log(1.0 - p));
    total += w;
  }
  return loss / total;
}

double softmax_loss(const Matrix& margin, std::span<const int> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto p = softmax(margin.row(i));
    loss -= std::log(std::max(p[y[i]], kProbFloor));
  }
  return loss / static_cast<double>(y.size());
}

}  // namespace

BoostedEnsemble train_gbdt(const Matrix& x, std::span<const int> labels, Objective objective,
                           int n_classes, const BoostConfig& config) {
  if (config.n_rounds < 1) throw Error(ErrorCode::kConfig, "n_rounds must be >= 1");
  if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0)) {
    throw Error(ErrorCode::kConfig, "learning_rate must lie in (0, 1]");
  }
  if (!(config.l2_lambda >= 0.0)) throw Error(ErrorCode::kConfig, "l2_lambda must be >= 0");
  if (!(config.subsample > 0.0 && config.subsample <= 1.0)) {
    throw Error(ErrorCode::kConfig, "subsample must lie in (0, 1]");
  }
  if (labels.size() != x.rows()) throw Error(ErrorCode::kShape, "label count does not match rows");
  if (x.rows() == 0) throw Error(ErrorCode::kDomain, "train_gbdt: no rows");
  const bool binary = objective == Objective::kBinaryLogloss;
  if (binary && n_classes != 2) {
    throw Error(ErrorCode::kObjective, "binary_logloss needs a two-class target");
  }
  if (!binary && n_classes < 3) {
    throw Error(ErrorCode::kObjective, "softmax needs at least three classes");
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes) {
      throw Error(ErrorCode::kObjective, "label " + std::to_string(y) + " does not fit objective " +
                                             objective_name(objective));
    }
  }

  const std::size_t n = x.rows();
  const int outputs = binary ? 1 : n_classes;
  BoostedEnsemble model;
  model.objective = objective;
  model.learning_rate = config.learning_rate;
  model.l2_lambda = config.l2_lambda;
  model.n_rounds = config.n_rounds;
  model.config = config;
  model.feature_names = detail::positional_names(x.cols());

  // Base score: logit of the (weighted) prevalence or log class priors.
  if (binary) {
    double pos = 0.0, total = 0.0;
    for (int y : labels) {
      const double w = y == 1 ? config.positive_weight : 1.0;
      pos += y == 1 ? w : 0.0;
      total += w;
    }
    model.base_score = {logit(std::clamp(pos / total, 1e-6, 1.0 - 1e-6))};
  } else {
    std::vector<double> counts(n_classes, 0.0);
    for (int y : labels) counts[y] += 1.0;
    for (double c : counts) {
      model.base_score.push_back(std::log(std::max(c / static_cast<double>(n), 1e-6)));
    }
  }

  Matrix margin(n, outputs);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < outputs; ++k) margin(i, k) = model.base_score[k];
  }
  auto current_loss = [&] {
    return binary ? binary_loss(margin.column(0), labels, config.positive_weight)
                  : softmax_loss(margin, labels);
  };
  model.training_loss_trace.push_back(current_loss());

  const auto presort = detail::Presort::build(x);
  detail::GrowthOptions opt;
  opt.max_depth = config.max_depth;
  opt.leaf_wise = config.growth == Growth::kLeafWise;
  opt.max_leaves = opt.leaf_wise ? config.max_leaves : 0;
  opt.min_samples_split = 2.0;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> weights(n, 1.0), grad(n), hess(n);

  for (int round = 0; round < config.n_rounds; ++round) {
    if (config.subsample < 1.0) {
      for (auto& w : weights) w = unit(rng) < config.subsample ? 1.0 : 0.0;
    }
    std::vector<std::vector<double>> probs(n);
    for (std::size_t i = 0; i < n; ++i) {
      probs[i] = binary ? std::vector<double>{sigmoid(margin(i, 0))} : softmax(margin.row(i));
    }
    std::vector<Tree> round_trees;
    for (int k = 0; k < outputs; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = probs[i][k];
        const double y = binary ? labels[i] : (labels[i] == k ? 1.0 : 0.0);
        const double w = (binary && labels[i] == 1) ? config.positive_weight : 1.0;
        grad[i] = w * (p - y);
        hess[i] = std::max(w * p * (1.0 - p), 1e-16);
      }
      NewtonCriterion crit{grad, hess, config.l2_lambda, config.min_child_weight};
      detail::TreeGrower<NewtonCriterion> grower(x, presort, weights, crit, opt, nullptr);
      round_trees.push_back(grower.grow());
    }
    for (int k = 0; k < outputs; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        margin(i, k) += config.learning_rate * round_trees[k].predict(x.row(i))[0];
      }
      model.trees.push_back(std::move(round_trees[k]));
    }
    model.training_loss_trace.push_back(current_loss());
  }
  return model;
}

BoostedEnsemble train_gbdt(const FeatureMatrix& matrix, Target target, const BoostConfig& config) {
  const auto m = detail::key_ordered(matrix);
  const auto objective = target == Target::kBinary ? Objective::kBinaryLogloss : Objective::kSoftmax;
  auto out = train_gbdt(m.values, target_labels(m, target), objective, n_classes_for(target), config);
  out.feature_names = m.column_names;
  return out;
}

BoostedEnsemble truncated(const BoostedEnsemble& model, int rounds) {
  BoostedEnsemble out = model;
  rounds = std::clamp(rounds, 0, model.n_rounds);
  out.trees.resize(static_cast<std::size_t>(rounds) * model.n_outputs());
  out.n_rounds = rounds;
  out.training_loss_trace.resize(std::min<std::size_t>(rounds + 1, model.training_loss_trace.size()));
  return out;
}

}  // namespace ews
