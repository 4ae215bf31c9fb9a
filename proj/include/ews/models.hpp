#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "ews/features.hpp"
#include "ews/stats.hpp"
#include "ews/tree.hpp"

namespace ews {

enum class Target { kBinary, kSeverity };

const char* target_name(Target target);
std::vector<int> target_labels(const FeatureMatrix& matrix, Target target);
inline int n_classes_for(Target target) { return target == Target::kBinary ? 2 : 3; }

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticConfig {
  double l2_lambda = 1e-3;
  int max_iters = 500;
  double tolerance = 1e-8;      // stop when the loss decrease falls below this
  double positive_weight = 1.0;
  bool operator==(const LogisticConfig&) const = default;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_lambda = 0.0;
  std::vector<double> training_loss_trace;
  std::vector<std::string> feature_names;
  bool operator==(const LinearModel&) const = default;
};

struct LogisticObjective {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

// Weighted mean log-loss plus (lambda/2)|w|^2 (bias unregularized) and its
// gradient: mean of (sigmoid(margin) - y) x plus lambda w.
LogisticObjective logistic_objective(const Matrix& x, std::span<const int> labels,
                                     std::span<const double> weights, double bias,
                                     double l2_lambda, double positive_weight = 1.0);

// Full-batch gradient descent with a backtracking (Armijo) step, so every
// accepted step decreases the loss. Throws kObjective for non-binary labels.
LinearModel train_logistic(const Matrix& x, std::span<const int> labels,
                           const LogisticConfig& config);
LinearModel train_logistic(const FeatureMatrix& matrix, const LogisticConfig& config);

// ---------------------------------------------------------------------------
// CART and random forest

struct TreeConfig {
  int max_depth = 5;
  double min_samples_split = 20.0;
  double min_gain = 0.0;
  bool operator==(const TreeConfig&) const = default;
};

struct DecisionTree {
  Tree tree;
  int n_classes = 2;
  TreeConfig config;
  std::vector<std::string> feature_names;
  bool operator==(const DecisionTree&) const = default;
};

// Gini impurity 1 - sum p_k^2 of (weighted) class counts.
double gini_impurity(std::span<const double> class_counts);

DecisionTree train_tree(const Matrix& x, std::span<const int> labels, int n_classes,
                        const TreeConfig& config, std::span<const double> weights = {});
DecisionTree train_tree(const FeatureMatrix& matrix, Target target, const TreeConfig& config);

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 8;
  double min_samples_split = 5.0;
  int feature_subsample = 0;  // 0: ceil(sqrt(p))
  bool bootstrap = true;
  std::uint64_t seed = 43;
  bool operator==(const ForestConfig&) const = default;
};

struct ForestModel {
  std::vector<Tree> trees;
  int n_classes = 2;
  int feature_subsample = 0;
  std::uint64_t bootstrap_seed = 0;
  ForestConfig config;
  std::vector<std::string> feature_names;
  bool operator==(const ForestModel&) const = default;
};

ForestModel train_forest(const Matrix& x, std::span<const int> labels, int n_classes,
                         const ForestConfig& config);
ForestModel train_forest(const FeatureMatrix& matrix, Target target, const ForestConfig& config);

// ---------------------------------------------------------------------------
// Newton gradient boosting

enum class Objective { kBinaryLogloss, kSoftmax };
enum class Growth { kDepthWise, kLeafWise };

const char* objective_name(Objective objective);
const char* growth_name(Growth growth);

struct BoostConfig {
  int n_rounds = 200;
  double learning_rate = 0.1;
  Growth growth = Growth::kDepthWise;
  int max_depth = 4;       // depth-wise limit; leaf-wise uses it only when >= 0
  int max_leaves = 15;     // leaf-wise only
  double l2_lambda = 1.0;
  double min_child_weight = 1.0;
  double subsample = 1.0;  // row fraction per round
  double positive_weight = 1.0;
  std::uint64_t seed = 44;

  // XGBoost-style depth-wise preset and LightGBM-style leaf-wise preset.
  static BoostConfig depth_wise();
  static BoostConfig leaf_wise();

  bool operator==(const BoostConfig&) const = default;
};

struct BoostedEnsemble {
  // Round-major: trees[round * n_outputs + k].
  std::vector<Tree> trees;
  std::vector<double> base_score;  // one entry (binary) or one per class
  double learning_rate = 0.1;
  double l2_lambda = 1.0;
  int n_rounds = 0;
  Objective objective = Objective::kBinaryLogloss;
  BoostConfig config;
  std::vector<double> training_loss_trace;  // loss after 0..n_rounds rounds
  std::vector<std::string> feature_names;

  int n_outputs() const { return objective == Objective::kBinaryLogloss ? 1 : static_cast<int>(base_score.size()); }
  int n_classes() const { return objective == Objective::kBinaryLogloss ? 2 : n_outputs(); }
  bool operator==(const BoostedEnsemble&) const = default;
};

// Throws kConfig for n_rounds < 1 and kObjective when the labels do not fit
// the objective (binary: {0,1}; softmax: >= 3 classes, labels < n_classes).
BoostedEnsemble train_gbdt(const Matrix& x, std::span<const int> labels, Objective objective,
                           int n_classes, const BoostConfig& config);
BoostedEnsemble train_gbdt(const FeatureMatrix& matrix, Target target, const BoostConfig& config);
// The first `rounds` boosting rounds of a model (0 gives the base score alone).
BoostedEnsemble truncated(const BoostedEnsemble& model, int rounds);

// ---------------------------------------------------------------------------
// Prediction

using Model = std::variant<LinearModel, DecisionTree, ForestModel, BoostedEnsemble>;

std::size_t model_feature_count(const Model& model);
int model_n_classes(const Model& model);
const std::vector<std::string>& model_feature_names(const Model& model);
std::string model_family(const Model& model);

// Margins: w.x + b (linear), base + sum lr * leaf (boosted; one column per
// output), logit of the positive-class probability (binary tree/forest), or
// class probabilities (multi-class tree/forest).
Matrix predict_margin(const Model& model, const Matrix& rows);
// rows x n_classes probabilities.
Matrix predict_proba(const Model& model, const Matrix& rows);
// argmax of predict_proba, ties toward the lower class index.
std::vector<int> predict_class(const Model& model, const Matrix& rows);
// Positive-class probability column of a binary model.
std::vector<double> predict_positive(const Model& model, const Matrix& rows);

// ---------------------------------------------------------------------------
// Platt scaling

struct PlattCalibrator {
  double a = 1.0;
  double b = 0.0;
  bool operator==(const PlattCalibrator&) const = default;
};

// Minimizes the log-loss of sigmoid(a*m + b) by projected gradient descent
// over a > 0: the slope on standardized margins is held at or above 1e-4, so
// the calibrated probabilities keep the ranking of the margins. Constant
// margins give a = 0 and sigmoid(b) = label mean. Throws kCalibration when
// the labels hold a single class.
PlattCalibrator fit_platt(std::span<const double> margins, std::span<const int> labels);
std::vector<double> apply_platt(const PlattCalibrator& cal, std::span<const double> margins);

// ---------------------------------------------------------------------------
// Persistence: versioned JSON documents that round-trip bit-exactly.

inline constexpr std::string_view kModelFormat = "ews-model/1";

std::string model_to_json(const Model& model);
Model model_from_json(std::string_view text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace ews
