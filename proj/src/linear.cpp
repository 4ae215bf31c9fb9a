#include <cmath>

#include "ews/error.hpp"
#include "ews/models.hpp"
#include "model_util.hpp"

namespace ews {

const char* target_name(Target target) {
  return target == Target::kBinary ? "binary" : "severity";
}

std::vector<int> target_labels(const FeatureMatrix& matrix, Target target) {
  return target == Target::kBinary ? matrix.target_binary : matrix.target_severity;
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

LogisticObjective logistic_objective(const Matrix& x, std::span<const int> labels,
                                     std::span<const double> weights, double bias,
                                     double l2_lambda, double positive_weight) {
  if (x.rows() != labels.size() || x.cols() != weights.size()) {
    throw Error(ErrorCode::kShape, "logistic_objective: dimension mismatch");
  }
  LogisticObjective out;
  out.grad_weights.assign(x.cols(), 0.0);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double margin = bias;
    for (std::size_t j = 0; j < row.size(); ++j) margin += weights[j] * row[j];
    const double w = labels[i] == 1 ? positive_weight : 1.0;
    // -[y log p + (1-y) log(1-p)] = softplus(m) - y m
    out.loss += w * (softplus(margin) - (labels[i] == 1 ? margin : 0.0));
    const double residual = w * (sigmoid(margin) - labels[i]);
    for (std::size_t j = 0; j < row.size(); ++j) out.grad_weights[j] += residual * row[j];
    out.grad_bias += residual;
    total_weight += w;
  }
  out.loss /= total_weight;
  out.grad_bias /= total_weight;
  double penalty = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    out.grad_weights[j] = out.grad_weights[j] / total_weight + l2_lambda * weights[j];
    penalty += weights[j] * weights[j];
  }
  out.loss += 0.5 * l2_lambda * penalty;
  return out;
}

LinearModel train_logistic(const Matrix& x, std::span<const int> labels,
                           const LogisticConfig& config) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::kObjective, "logistic regression needs 0/1 labels");
  }
  if (x.rows() == 0) throw Error(ErrorCode::kDomain, "train_logistic: no rows");

  LinearModel model;
  model.l2_lambda = config.l2_lambda;
  model.weights.assign(x.cols(), 0.0);
  model.feature_names = detail::positional_names(x.cols());
  auto current = logistic_objective(x, labels, model.weights, model.bias, config.l2_lambda,
                                    config.positive_weight);
  model.training_loss_trace.push_back(current.loss);

  double step = 1.0;
  std::vector<double> trial(x.cols());
  for (int iter = 0; iter < config.max_iters; ++iter) {
    double grad_sq = current.grad_bias * current.grad_bias;
    for (double g : current.grad_weights) grad_sq += g * g;
    if (grad_sq == 0.0) break;

    // Backtrack until the Armijo condition holds.
    bool accepted = false;
    LogisticObjective next;
    double trial_bias = 0.0;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t j = 0; j < trial.size(); ++j) {
        trial[j] = model.weights[j] - step * current.grad_weights[j];
      }
      trial_bias = model.bias - step * current.grad_bias;
      next = logistic_objective(x, labels, trial, trial_bias, config.l2_lambda,
                                config.positive_weight);
      if (next.loss <= current.loss - 1e-4 * step * grad_sq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const double decrease = current.loss - next.loss;
    model.weights = trial;
    model.bias = trial_bias;
    current = std::move(next);
    model.training_loss_trace.push_back(current.loss);
    step = std::min(step * 2.0, 64.0);
    if (decrease < config.tolerance) break;
  }
  return model;
}

LinearModel train_logistic(const FeatureMatrix& matrix, const LogisticConfig& config) {
  auto model = train_logistic(matrix.values, matrix.target_binary, config);
  model.feature_names = matrix.column_names;
  return model;
}

}  // namespace ews
