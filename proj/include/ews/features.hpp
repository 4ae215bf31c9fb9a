#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ews/panel_data.hpp"
#include "ews/stats.hpp"

namespace ews {

struct Key {
  std::int64_t household_id = 0;
  int round = 0;
  auto operator<=>(const Key&) const = default;
};

// Columns referenced by name; resolved against the canonical schema on use.
struct FeatureRecipe {
  std::vector<std::string> lag_columns;
  std::vector<std::string> rolling_columns;
  int rolling_window = 2;
  std::vector<std::string> velocity_columns;
  std::vector<std::pair<std::string, std::string>> interactions;
  std::vector<std::string> squared_columns;
  std::vector<std::string> skew_log_columns;

  // Lags, rolling stats and velocities for every numeric indicator;
  // disaster_impact x household_borrowing_rate and household_borrowing_rate^2;
  // log1p on the right-skewed indicators.
  static FeatureRecipe defaults();

  // Throws kSchema for unknown names, kType for categorical names, kConfig for
  // a bad window. n_rounds = 0 skips the window-vs-rounds check.
  void validate(int n_rounds = 0) const;

  bool operator==(const FeatureRecipe&) const = default;
};

// Maps a column name onto a numeric indicator; kType for categorical columns,
// kSchema for unknown names.
Indicator resolve_numeric_column(const std::string& name);

// Column-major engineered columns keyed by (household, round). NaN = missing.
struct KeyedColumns {
  std::vector<Key> keys;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  // Row-aligned categorical and target data, carried for the transform step.
  std::vector<std::optional<Level>> disaster_level;
  std::vector<int> target_binary;
  std::vector<int> target_severity;

  void append(std::string name, std::vector<double> column);
  void append_all(KeyedColumns other);
  const std::vector<double>& column(const std::string& name) const;
};

int ordinal_encode_severity(std::string_view label);
inline int ordinal_encode_severity(Level level) { return static_cast<int>(level); }

// One-round lag per column; round-1 (or otherwise missing) lags are imputed
// with the household's round-1 value and flagged in `lag_<c>_missing`.
KeyedColumns add_lags(const PanelDataset& data, const std::vector<std::string>& columns);
// roll_mean_<c> and roll_sd_<c> (sample sd) over rounds max(1, r-window+1)..r.
KeyedColumns add_rolling(const PanelDataset& data, const std::vector<std::string>& columns,
                         int window);
// vel_<c> = c(r) - c(r-1); 0 with vel_<c>_missing = 1 when undefined.
KeyedColumns add_velocity(const PanelDataset& data, const std::vector<std::string>& columns);
// <a>_x_<b> products and <c>_sq squares.
KeyedColumns add_interactions(const PanelDataset& data, const FeatureRecipe& recipe);

// Raw indicators, then every engineered group, then the missing-indicator
// flags. The disaster level is carried alongside and one-hot encoded by
// apply_transforms.
KeyedColumns build_feature_columns(const PanelDataset& data, const FeatureRecipe& recipe);

struct ColumnTransform {
  std::string name;
  bool log1p = false;
  double impute_value = 0.0;  // median on the training slice (pre-log)
  double mean = 0.0;          // post-log mean
  double sd = 1.0;            // post-log population sd
  bool constant = false;
  bool operator==(const ColumnTransform&) const = default;
};

struct TransformState {
  FeatureRecipe recipe;
  std::set<int> fitted_on_rounds;
  std::vector<ColumnTransform> columns;   // standardized columns
  std::vector<std::string> flag_columns;  // passed through as 0/1
  // Population sd of each raw indicator on the training slice (shock scale).
  std::array<double, kNumIndicators> raw_sd{};
  Level disaster_level_mode = Level::kMedium;
  std::set<int> seen_disaster_levels;

  bool operator==(const TransformState&) const = default;
};

struct FeatureMatrix {
  std::vector<Key> keys;
  std::vector<std::string> column_names;
  Matrix values;
  std::size_t n_flag_columns = 0;  // trailing flag columns
  std::vector<int> target_binary;
  std::vector<int> target_severity;
  std::vector<std::string> warnings;

  std::size_t rows() const noexcept { return keys.size(); }
  std::size_t cols() const noexcept { return column_names.size(); }
  std::size_t column_index(const std::string& name) const;
  FeatureMatrix select(std::span<const std::size_t> indices) const;
};

TransformState fit_transforms(const PanelDataset& data, const FeatureRecipe& recipe,
                              const std::set<int>& train_rounds);
FeatureMatrix apply_transforms(const TransformState& state, const KeyedColumns& columns);
// build_feature_columns followed by apply_transforms.
FeatureMatrix build_feature_matrix(const TransformState& state, const PanelDataset& data);

std::string format_feature_csv(const FeatureMatrix& matrix);
// The values a matrix takes after a write/read round trip through CSV.
FeatureMatrix at_csv_precision(FeatureMatrix matrix);
void write_feature_csv(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

inline constexpr std::string_view kTransformStateFormat = "ews-transform-state/1";
std::string transform_state_to_json(const TransformState& state);
// Throws kSchema for documents that do not describe a transform state.
TransformState transform_state_from_json(std::string_view text);

}  // namespace ews
