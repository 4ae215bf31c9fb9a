#include <algorithm>
#include <cmath>

#include "ews/error.hpp"
#include "ews/models.hpp"

namespace ews {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_width(const Model& model, const Matrix& rows) {
  const auto expected = model_feature_count(model);
  if (rows.cols() != expected) {
    throw Error(ErrorCode::kShape, "model expects " + std::to_string(expected) +
                                       " features, rows have " + std::to_string(rows.cols()));
  }
}

// Mean of per-tree class-frequency vectors.
Matrix average_leaves(const std::vector<Tree>& trees, int n_classes, const Matrix& rows) {
  Matrix out(rows.rows(), n_classes);
  const double scale = 1.0 / static_cast<double>(trees.size());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (const auto& tree : trees) {
      const auto& v = tree.predict(rows.row(i));
      for (int k = 0; k < n_classes; ++k) out(i, k) += v[k];
    }
    for (int k = 0; k < n_classes; ++k) out(i, k) *= scale;
  }
  return out;
}

Matrix boosted_margin(const BoostedEnsemble& m, const Matrix& rows) {
  const int outputs = m.n_outputs();
  Matrix out(rows.rows(), outputs);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto row = rows.row(i);
    for (int k = 0; k < outputs; ++k) {
      double sum = 0.0;
      for (std::size_t t = k; t < m.trees.size(); t += outputs) sum += m.trees[t].predict(row)[0];
      out(i, k) = m.base_score[k] + m.learning_rate * sum;
    }
  }
  return out;
}

Matrix tree_proba(const Model& model, const Matrix& rows) {
  if (const auto* t = std::get_if<DecisionTree>(&model)) {
    return average_leaves({t->tree}, t->n_classes, rows);
  }
  const auto& f = std::get<ForestModel>(model);
  return average_leaves(f.trees, f.n_classes, rows);
}

constexpr double kMarginClamp = 1e-6;

}  // namespace

std::size_t model_feature_count(const Model& model) {
  return std::visit(overloaded{
                        [](const LinearModel& m) { return m.weights.size(); },
                        [](const auto& m) { return m.feature_names.size(); },
                    },
                    model);
}

int model_n_classes(const Model& model) {
  return std::visit(overloaded{
                        [](const LinearModel&) { return 2; },
                        [](const DecisionTree& m) { return m.n_classes; },
                        [](const ForestModel& m) { return m.n_classes; },
                        [](const BoostedEnsemble& m) { return m.n_classes(); },
                    },
                    model);
}

const std::vector<std::string>& model_feature_names(const Model& model) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.feature_names; },
                    model);
}

std::string model_family(const Model& model) {
  return std::visit(overloaded{
                        [](const LinearModel&) { return std::string("logistic"); },
                        [](const DecisionTree&) { return std::string("tree"); },
                        [](const ForestModel&) { return std::string("forest"); },
                        [](const BoostedEnsemble& m) {
                          return std::string(m.config.growth == Growth::kDepthWise ? "xgboost"
                                                                                   : "lightgbm");
                        },
                    },
                    model);
}

Matrix predict_margin(const Model& model, const Matrix& rows) {
  check_width(model, rows);
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    Matrix out(rows.rows(), 1);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      const auto row = rows.row(i);
      double m = lin->bias;
      for (std::size_t j = 0; j < row.size(); ++j) m += lin->weights[j] * row[j];
      out(i, 0) = m;
    }
    return out;
  }
  if (const auto* boosted = std::get_if<BoostedEnsemble>(&model)) return boosted_margin(*boosted, rows);
  Matrix proba = tree_proba(model, rows);
  if (proba.cols() != 2) return proba;
  Matrix out(rows.rows(), 1);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    out(i, 0) = logit(std::clamp(proba(i, 1), kMarginClamp, 1.0 - kMarginClamp));
  }
  return out;
}

Matrix predict_proba(const Model& model, const Matrix& rows) {
  check_width(model, rows);
  if (std::holds_alternative<DecisionTree>(model) || std::holds_alternative<ForestModel>(model)) {
    return tree_proba(model, rows);
  }
  const Matrix margin = predict_margin(model, rows);
  const int k = model_n_classes(model);
  Matrix out(rows.rows(), k);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    if (margin.cols() == 1) {
      const double p = sigmoid(margin(i, 0));
      out(i, 0) = 1.0 - p;
      out(i, 1) = p;
    } else {
      const auto p = softmax(margin.row(i));
      std::copy(p.begin(), p.end(), out.row(i).begin());
    }
  }
  return out;
}

std::vector<int> predict_class(const Model& model, const Matrix& rows) {
  const Matrix proba = predict_proba(model, rows);
  std::vector<int> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto p = proba.row(i);
    out[i] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  return out;
}

std::vector<double> predict_positive(const Model& model, const Matrix& rows) {
  if (model_n_classes(model) != 2) {
    throw Error(ErrorCode::kObjective, "predict_positive needs a binary model");
  }
  return predict_proba(model, rows).column(1);
}

}  // namespace ews
