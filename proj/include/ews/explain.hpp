#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ews/features.hpp"
#include "ews/models.hpp"
#include "ews/tree.hpp"

namespace ews {

// Cover-weighted mean of the leaf values (output `output`) of a tree.
double expected_value(const Tree& tree, int output = 0);

// Exact path-dependent Shapley values of one tree output for one row:
// v(S) is the expected leaf value when features in S follow the row and the
// others are averaged by child cover. Result has row.size() entries and
// satisfies expected_value + sum = leaf value. Throws kModelIntegrity on a
// zero-cover node.
std::vector<double> tree_shap(const Tree& tree, std::span<const double> row, int output = 0);

struct ShapAttribution {
  Key key;
  int explained_class = 1;
  double base_value = 0.0;
  std::vector<double> contributions;
  double predicted_margin = 0.0;
};

struct ShapSet {
  std::string model_family;
  // "margin" (logistic, boosted) or "probability" (tree, forest).
  std::string output_space;
  std::vector<std::string> feature_names;
  std::vector<ShapAttribution> rows;
};

// Per-row attributions for a tree ensemble or a single tree. Boosted models
// explain the margin (per-tree values scaled by the learning rate), forests
// and trees the class probability (scaled by 1 / n_trees). Binary models
// explain class 1; multi-class models the row's predicted class unless
// `explained_class` is given.
ShapSet ensemble_shap(const Model& model, const FeatureMatrix& rows,
                      std::optional<int> explained_class = std::nullopt);

// w_j (x_j - mean_j); base = w . mean + b. Throws kShape on a size mismatch.
std::vector<double> linear_shap(const LinearModel& model, std::span<const double> row,
                                std::span<const double> background_means);
ShapSet linear_shap(const LinearModel& model, const FeatureMatrix& rows,
                    std::span<const double> background_means);

// Column means of a matrix (background for linear_shap).
std::vector<double> column_means(const Matrix& x);

// Dispatches on the model family; `background` is used for linear models only.
ShapSet explain_model(const Model& model, const FeatureMatrix& rows, const Matrix& background,
                      std::optional<int> explained_class = std::nullopt);

// Mean |contribution| per feature, descending, ties by feature name. Throws
// kDomain for an empty set.
std::vector<std::pair<std::string, double>> global_importance(const ShapSet& set);

enum class Direction { kTowardDistress, kTowardStability };
const char* direction_name(Direction d);

struct NarrativeFactor {
  std::string feature;
  double value = 0.0;
  double contribution = 0.0;
  std::string phrase;
};

struct Narrative {
  Key key;
  Direction direction = Direction::kTowardStability;
  std::vector<NarrativeFactor> top_factors;
  std::string summary;
};

// Top-k factors by |contribution| (ties by feature order). Overall direction
// is the sign of margin - base, falling back to the sign of the base when
// they are equal. `row` holds the feature values shown in the phrases.
Narrative render_narrative(const ShapAttribution& attribution,
                           const std::vector<std::string>& feature_names,
                           std::span<const double> row, int k);

// household_id,round,explained_class,base_value,<features...>,predicted_margin
std::string format_attributions_csv(const ShapSet& set);

}  // namespace ews
