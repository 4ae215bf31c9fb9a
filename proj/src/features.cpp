#include "ews/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ews/error.hpp"

namespace ews {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool is_categorical_name(const std::string& name) {
  return name == "disaster_level" || name == "severity_label" || name == "distress_label";
}

// Row ranges of each household; records are sorted by (household, round).
std::vector<std::pair<std::size_t, std::size_t>> household_spans(const PanelDataset& data) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= data.size(); ++i) {
    if (i == data.size() || data.records[i].household_id != data.records[start].household_id) {
      spans.emplace_back(start, i);
      start = i;
    }
  }
  return spans;
}

KeyedColumns keyed_skeleton(const PanelDataset& data) {
  KeyedColumns out;
  out.keys.reserve(data.size());
  for (const auto& rec : data.records) {
    out.keys.push_back({rec.household_id, rec.round});
    out.disaster_level.push_back(rec.disaster_level);
    out.target_binary.push_back(rec.distress_label);
    out.target_severity.push_back(ordinal_encode_severity(rec.severity_label));
  }
  return out;
}

std::vector<double> raw_column(const PanelDataset& data, Indicator ind) {
  std::vector<double> col;
  col.reserve(data.size());
  for (const auto& rec : data.records) col.push_back(rec.value(ind));
  return col;
}

}  // namespace

FeatureRecipe FeatureRecipe::defaults() {
  FeatureRecipe r;
  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    const std::string name(indicator_name(static_cast<Indicator>(k)));
    r.lag_columns.push_back(name);
    r.rolling_columns.push_back(name);
    r.velocity_columns.push_back(name);
  }
  r.rolling_window = 2;
  r.interactions = {{"disaster_impact", "household_borrowing_rate"}};
  r.squared_columns = {"household_borrowing_rate"};
  r.skew_log_columns = {"household_borrowing_rate", "cyber_incident_count", "disaster_impact",
                        "disaster_severity_score"};
  return r;
}

Indicator resolve_numeric_column(const std::string& name) {
  if (is_categorical_name(name)) {
    throw Error(ErrorCode::kType, "column '" + name + "' is categorical, not numeric");
  }
  const auto ind = indicator_from_name(name);
  if (!ind) throw Error(ErrorCode::kSchema, "unknown column '" + name + "'");
  return *ind;
}

void FeatureRecipe::validate(int n_rounds) const {
  for (const auto* list : {&lag_columns, &rolling_columns, &velocity_columns, &squared_columns,
                           &skew_log_columns}) {
    for (const auto& name : *list) resolve_numeric_column(name);
  }
  for (const auto& [a, b] : interactions) {
    resolve_numeric_column(a);
    resolve_numeric_column(b);
  }
  if (rolling_window < 2) throw Error(ErrorCode::kConfig, "rolling_window must be >= 2");
  if (n_rounds > 0 && rolling_window > n_rounds) {
    throw Error(ErrorCode::kConfig, "rolling_window must be <= n_rounds (" +
                                        std::to_string(n_rounds) + ")");
  }
}

void KeyedColumns::append(std::string name, std::vector<double> column) {
  if (column.size() != keys.size()) {
    throw Error(ErrorCode::kShape, "column '" + name + "' length does not match keys");
  }
  names.push_back(std::move(name));
  values.push_back(std::move(column));
}

void KeyedColumns::append_all(KeyedColumns other) {
  if (other.keys != keys) throw Error(ErrorCode::kShape, "keyed column sets are not aligned");
  for (std::size_t i = 0; i < other.names.size(); ++i) {
    append(std::move(other.names[i]), std::move(other.values[i]));
  }
}

const std::vector<double>& KeyedColumns::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorCode::kSchema, "no column named '" + name + "'");
  return values[it - names.begin()];
}

int ordinal_encode_severity(std::string_view label) {
  return static_cast<int>(parse_level(label));
}

KeyedColumns add_lags(const PanelDataset& data, const std::vector<std::string>& columns) {
  KeyedColumns out = keyed_skeleton(data);
  const auto spans = household_spans(data);
  std::vector<std::vector<double>> flags;
  for (const auto& name : columns) {
    const auto src = raw_column(data, resolve_numeric_column(name));
    std::vector<double> lag(data.size()), flag(data.size(), 0.0);
    for (const auto& [begin, end] : spans) {
      const double first = src[begin];
      for (std::size_t i = begin; i < end; ++i) {
        const bool defined = i > begin && !std::isnan(src[i - 1]);
        lag[i] = defined ? src[i - 1] : first;
        flag[i] = defined ? 0.0 : 1.0;
      }
    }
    out.append("lag_" + name, std::move(lag));
    flags.push_back(std::move(flag));
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.append("lag_" + columns[c] + "_missing", std::move(flags[c]));
  }
  return out;
}

KeyedColumns add_rolling(const PanelDataset& data, const std::vector<std::string>& columns,
                         int window) {
  if (window < 2) throw Error(ErrorCode::kConfig, "rolling window must be >= 2");
  KeyedColumns out = keyed_skeleton(data);
  const auto spans = household_spans(data);
  for (const auto& name : columns) {
    const auto src = raw_column(data, resolve_numeric_column(name));
    std::vector<double> mu(data.size()), sd(data.size());
    for (const auto& [begin, end] : spans) {
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t from = i + 1 >= begin + window ? i + 1 - window : begin;
        std::vector<double> win;
        for (std::size_t j = from; j <= i; ++j) {
          if (!std::isnan(src[j])) win.push_back(src[j]);
        }
        if (win.empty()) {
          mu[i] = kMissing;
          sd[i] = kMissing;
        } else {
          mu[i] = mean(win);
          sd[i] = sample_sd(win);
        }
      }
    }
    out.append("roll_mean_" + name, std::move(mu));
    out.append("roll_sd_" + name, std::move(sd));
  }
  return out;
}

KeyedColumns add_velocity(const PanelDataset& data, const std::vector<std::string>& columns) {
  KeyedColumns out = keyed_skeleton(data);
  const auto spans = household_spans(data);
  std::vector<std::vector<double>> flags;
  for (const auto& name : columns) {
    const auto src = raw_column(data, resolve_numeric_column(name));
    std::vector<double> vel(data.size()), flag(data.size(), 0.0);
    for (const auto& [begin, end] : spans) {
      for (std::size_t i = begin; i < end; ++i) {
        const bool defined = i > begin && !std::isnan(src[i]) && !std::isnan(src[i - 1]);
        vel[i] = defined ? src[i] - src[i - 1] : 0.0;
        flag[i] = defined ? 0.0 : 1.0;
      }
    }
    out.append("vel_" + name, std::move(vel));
    flags.push_back(std::move(flag));
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.append("vel_" + columns[c] + "_missing", std::move(flags[c]));
  }
  return out;
}

KeyedColumns add_interactions(const PanelDataset& data, const FeatureRecipe& recipe) {
  KeyedColumns out = keyed_skeleton(data);
  for (const auto& [a, b] : recipe.interactions) {
    const auto xa = raw_column(data, resolve_numeric_column(a));
    const auto xb = raw_column(data, resolve_numeric_column(b));
    std::vector<double> prod(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) prod[i] = xa[i] * xb[i];
    out.append(a + "_x_" + b, std::move(prod));
  }
  for (const auto& c : recipe.squared_columns) {
    auto x = raw_column(data, resolve_numeric_column(c));
    for (double& v : x) v = v * v;
    out.append(c + "_sq", std::move(x));
  }
  return out;
}

namespace {

bool is_flag_name(const std::string& name) {
  constexpr std::string_view suffix = "_missing";
  return name.size() > suffix.size() &&
         std::string_view(name).substr(name.size() - suffix.size()) == suffix;
}

constexpr std::string_view kLevelFlag = "disaster_level_missing";
const std::array<std::string, 2> kOneHotNames = {"disaster_level_Medium", "disaster_level_High"};

// Standardized (non-flag) columns in output order: raw numerics, one-hot
// level, then engineered columns in build order.
std::vector<std::string> standardized_names(const KeyedColumns& cols) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < kNumIndicators; ++k) out.emplace_back(cols.names[k]);
  out.insert(out.end(), kOneHotNames.begin(), kOneHotNames.end());
  for (std::size_t c = kNumIndicators; c < cols.names.size(); ++c) {
    if (!is_flag_name(cols.names[c])) out.push_back(cols.names[c]);
  }
  return out;
}

std::vector<std::string> flag_names(const KeyedColumns& cols) {
  std::vector<std::string> out;
  for (const auto& n : cols.names) {
    if (is_flag_name(n)) out.push_back(n);
  }
  out.emplace_back(kLevelFlag);
  return out;
}

std::set<std::string> log_column_names(const FeatureRecipe& recipe) {
  std::set<std::string> out;
  for (const auto& c : recipe.skew_log_columns) {
    out.insert(c);
    out.insert("lag_" + c);
    out.insert("roll_mean_" + c);
  }
  return out;
}

double log1p_checked(double v, const std::string& name) {
  if (v <= -1.0) {
    throw Error(ErrorCode::kDomain, "log1p undefined for value " + std::to_string(v) +
                                        " in column '" + name + "'");
  }
  return std::log1p(v);
}

}  // namespace

KeyedColumns build_feature_columns(const PanelDataset& data, const FeatureRecipe& recipe) {
  recipe.validate();
  KeyedColumns out = keyed_skeleton(data);
  std::vector<std::vector<double>> raw_flags;
  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    const auto ind = static_cast<Indicator>(k);
    auto col = raw_column(data, ind);
    std::vector<double> flag(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) flag[i] = std::isnan(col[i]) ? 1.0 : 0.0;
    out.append(std::string(indicator_name(ind)), std::move(col));
    raw_flags.push_back(std::move(flag));
  }

  KeyedColumns lags = add_lags(data, recipe.lag_columns);
  KeyedColumns rolling = add_rolling(data, recipe.rolling_columns, recipe.rolling_window);
  KeyedColumns velocity = add_velocity(data, recipe.velocity_columns);
  KeyedColumns inter = add_interactions(data, recipe);

  // Values first, flags last, each group in build order.
  std::vector<std::pair<std::string, std::vector<double>>> flag_cols;
  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    flag_cols.emplace_back(out.names[k] + "_missing", std::move(raw_flags[k]));
  }
  for (KeyedColumns* group : {&lags, &rolling, &velocity, &inter}) {
    for (std::size_t c = 0; c < group->names.size(); ++c) {
      if (is_flag_name(group->names[c])) {
        flag_cols.emplace_back(std::move(group->names[c]), std::move(group->values[c]));
      } else {
        out.append(std::move(group->names[c]), std::move(group->values[c]));
      }
    }
  }
  for (auto& [name, col] : flag_cols) out.append(std::move(name), std::move(col));
  return out;
}

TransformState fit_transforms(const PanelDataset& data, const FeatureRecipe& recipe,
                              const std::set<int>& train_rounds) {
  if (train_rounds.empty()) throw Error(ErrorCode::kDomain, "fit_transforms: no training rounds");
  // Engineered values at round r depend only on rounds <= r, so the history up
  // to the last training round is all that is needed.
  const int last = *train_rounds.rbegin();
  PanelDataset history;
  for (const auto& rec : data.records) {
    if (rec.round <= last) history.records.push_back(rec);
  }
  const KeyedColumns cols = build_feature_columns(history, recipe);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < cols.keys.size(); ++i) {
    if (train_rounds.contains(cols.keys[i].round)) rows.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorCode::kDomain, "fit_transforms: empty training slice");

  TransformState state;
  state.recipe = recipe;
  state.fitted_on_rounds = train_rounds;

  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    std::vector<double> present;
    for (std::size_t i : rows) {
      if (!std::isnan(cols.values[k][i])) present.push_back(cols.values[k][i]);
    }
    state.raw_sd[k] = present.empty() ? 0.0 : population_sd(present);
  }

  std::array<std::size_t, 3> level_counts{};
  for (std::size_t i : rows) {
    if (cols.disaster_level[i]) {
      const int lv = static_cast<int>(*cols.disaster_level[i]);
      level_counts[lv] += 1;
      state.seen_disaster_levels.insert(lv);
    }
  }
  // Mode; ties resolved toward the lower level.
  state.disaster_level_mode = static_cast<Level>(
      std::max_element(level_counts.begin(), level_counts.end()) - level_counts.begin());
  if (state.seen_disaster_levels.empty()) state.disaster_level_mode = Level::kMedium;

  const auto log_names = log_column_names(recipe);
  for (const auto& name : standardized_names(cols)) {
    ColumnTransform t;
    t.name = name;
    std::vector<double> train_values;
    train_values.reserve(rows.size());
    if (name == kOneHotNames[0] || name == kOneHotNames[1]) {
      const Level target = name == kOneHotNames[0] ? Level::kMedium : Level::kHigh;
      for (std::size_t i : rows) {
        const Level lv = cols.disaster_level[i] && state.seen_disaster_levels.contains(
                                                       static_cast<int>(*cols.disaster_level[i]))
                             ? *cols.disaster_level[i]
                             : state.disaster_level_mode;
        train_values.push_back(lv == target ? 1.0 : 0.0);
      }
      t.impute_value = 0.0;
    } else {
      t.log1p = log_names.contains(name);
      const auto& col = cols.column(name);
      std::vector<double> present;
      for (std::size_t i : rows) {
        if (!std::isnan(col[i])) present.push_back(col[i]);
      }
      t.impute_value = present.empty() ? 0.0 : median(present);
      for (std::size_t i : rows) {
        double v = std::isnan(col[i]) ? t.impute_value : col[i];
        train_values.push_back(t.log1p ? log1p_checked(v, name) : v);
      }
    }
    t.mean = mean(train_values);
    t.sd = population_sd(train_values);
    const double lo = *std::min_element(train_values.begin(), train_values.end());
    const double hi = *std::max_element(train_values.begin(), train_values.end());
    t.constant = lo == hi || !(t.sd > 0.0);
    if (t.constant) t.sd = 1.0;
    state.columns.push_back(std::move(t));
  }
  state.flag_columns = flag_names(cols);
  return state;
}

FeatureMatrix apply_transforms(const TransformState& state, const KeyedColumns& cols) {
  const std::size_t n = cols.keys.size();
  FeatureMatrix out;
  out.keys = cols.keys;
  out.target_binary = cols.target_binary;
  out.target_severity = cols.target_severity;
  for (const auto& t : state.columns) out.column_names.push_back(t.name);
  for (const auto& f : state.flag_columns) out.column_names.push_back(f);
  out.n_flag_columns = state.flag_columns.size();
  out.values = Matrix(n, out.column_names.size());

  // Imputed disaster level per row.
  std::vector<Level> level(n);
  std::vector<double> level_flag(n, 0.0);
  std::size_t unseen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& lv = cols.disaster_level[i];
    if (lv && state.seen_disaster_levels.contains(static_cast<int>(*lv))) {
      level[i] = *lv;
    } else {
      level[i] = state.disaster_level_mode;
      level_flag[i] = 1.0;
      if (lv) ++unseen;
    }
  }
  if (unseen > 0) {
    out.warnings.push_back(std::to_string(unseen) +
                           " row(s) with a disaster_level unseen in training encoded as mode " +
                           std::string(level_name(state.disaster_level_mode)));
  }

  for (std::size_t c = 0; c < state.columns.size(); ++c) {
    const auto& t = state.columns[c];
    if (t.name == kOneHotNames[0] || t.name == kOneHotNames[1]) {
      const Level target = t.name == kOneHotNames[0] ? Level::kMedium : Level::kHigh;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = level[i] == target ? 1.0 : 0.0;
        out.values(i, c) = t.constant ? 0.0 : (v - t.mean) / t.sd;
      }
      continue;
    }
    const auto& col = cols.column(t.name);
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::isnan(col[i]) ? t.impute_value : col[i];
      if (t.log1p) v = log1p_checked(v, t.name);
      out.values(i, c) = t.constant ? 0.0 : (v - t.mean) / t.sd;
    }
  }
  for (std::size_t f = 0; f < state.flag_columns.size(); ++f) {
    const std::size_t c = state.columns.size() + f;
    const auto& name = state.flag_columns[f];
    const auto& col = name == kLevelFlag ? level_flag : cols.column(name);
    for (std::size_t i = 0; i < n; ++i) out.values(i, c) = col[i];
  }
  return out;
}

FeatureMatrix build_feature_matrix(const TransformState& state, const PanelDataset& data) {
  return apply_transforms(state, build_feature_columns(data, state.recipe));
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) throw Error(ErrorCode::kSchema, "no feature named '" + name + "'");
  return static_cast<std::size_t>(it - column_names.begin());
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.column_names = column_names;
  out.n_flag_columns = n_flag_columns;
  out.values = values.select_rows(indices);
  out.warnings = warnings;
  for (std::size_t i : indices) {
    out.keys.push_back(keys[i]);
    out.target_binary.push_back(target_binary[i]);
    out.target_severity.push_back(target_severity[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_feature_csv(const FeatureMatrix& m) {
  std::string out = "household_id,round";
  for (const auto& name : m.column_names) out += "," + name;
  out += ",target_binary,target_severity\n";
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += std::to_string(m.keys[i].household_id);
    out += ',';
    out += std::to_string(m.keys[i].round);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.6f", m.values(i, c));
      out += buf;
    }
    out += ',';
    out += std::to_string(m.target_binary[i]);
    out += ',';
    out += std::to_string(m.target_severity[i]);
    out += '\n';
  }
  return out;
}

FeatureMatrix at_csv_precision(FeatureMatrix matrix) {
  char buf[64];
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      const int n = std::snprintf(buf, sizeof buf, "%.6f", matrix.values(i, c));
      std::from_chars(buf, buf + n, matrix.values(i, c));
    }
  }
  return matrix;
}

void write_feature_csv(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << format_feature_csv(matrix);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchema, path.string() + ": empty file");

  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (!s.empty() && s.back() == ',') parts.emplace_back();
    return parts;
  };
  const auto header = split(line);
  if (header.size() < 4 || header[0] != "household_id" || header[1] != "round" ||
      header[header.size() - 2] != "target_binary" || header.back() != "target_severity") {
    throw Error(ErrorCode::kSchema, path.string() + ": not a feature matrix file");
  }
  FeatureMatrix m;
  m.column_names.assign(header.begin() + 2, header.end() - 2);
  for (auto it = m.column_names.rbegin(); it != m.column_names.rend() && is_flag_name(*it); ++it) {
    ++m.n_flag_columns;
  }

  std::vector<double> data;
  std::size_t line_no = 1;
  auto parse = [&](const std::string& cell, auto& value) {
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
      throw Error(ErrorCode::kParse, path.string() + ", line " + std::to_string(line_no) +
                                         ": cannot parse '" + cell + "'");
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParse, path.string() + ", line " + std::to_string(line_no) +
                                         ": wrong field count");
    }
    Key key;
    parse(cells[0], key.household_id);
    parse(cells[1], key.round);
    m.keys.push_back(key);
    for (std::size_t c = 2; c + 2 < cells.size(); ++c) {
      double v;
      parse(cells[c], v);
      data.push_back(v);
    }
    int yb, ys;
    parse(cells[cells.size() - 2], yb);
    parse(cells.back(), ys);
    m.target_binary.push_back(yb);
    m.target_severity.push_back(ys);
  }
  m.values = Matrix(m.keys.size(), m.column_names.size());
  for (std::size_t i = 0; i < m.keys.size(); ++i) {
    for (std::size_t c = 0; c < m.column_names.size(); ++c) {
      m.values(i, c) = data[i * m.column_names.size() + c];
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// TransformState JSON

using nlohmann::json;

std::string transform_state_to_json(const TransformState& state) {
  const auto& r = state.recipe;
  json recipe = {{"lag_columns", r.lag_columns},
                 {"rolling_columns", r.rolling_columns},
                 {"rolling_window", r.rolling_window},
                 {"velocity_columns", r.velocity_columns},
                 {"interactions", r.interactions},
                 {"squared_columns", r.squared_columns},
                 {"skew_log_columns", r.skew_log_columns}};
  json columns = json::array();
  for (const auto& c : state.columns) {
    columns.push_back({{"name", c.name},
                       {"log1p", c.log1p},
                       {"impute_value", c.impute_value},
                       {"mean", c.mean},
                       {"sd", c.sd},
                       {"constant", c.constant}});
  }
  json raw_sd = json::object();
  for (std::size_t k = 0; k < kNumIndicators; ++k) {
    raw_sd[std::string(indicator_name(static_cast<Indicator>(k)))] = state.raw_sd[k];
  }
  const json doc = {{"format", kTransformStateFormat},
                    {"recipe", recipe},
                    {"fitted_on_rounds", state.fitted_on_rounds},
                    {"columns", columns},
                    {"flag_columns", state.flag_columns},
                    {"raw_sd", raw_sd},
                    {"disaster_level_mode", level_name(state.disaster_level_mode)},
                    {"seen_disaster_levels", state.seen_disaster_levels}};
  return doc.dump(1) + "\n";
}

TransformState transform_state_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kTransformStateFormat) {
      throw Error(ErrorCode::kSchema, "unsupported transform state format");
    }
    TransformState state;
    const auto& r = doc.at("recipe");
    state.recipe.lag_columns = r.at("lag_columns").get<std::vector<std::string>>();
    state.recipe.rolling_columns = r.at("rolling_columns").get<std::vector<std::string>>();
    state.recipe.rolling_window = r.at("rolling_window").get<int>();
    state.recipe.velocity_columns = r.at("velocity_columns").get<std::vector<std::string>>();
    state.recipe.interactions =
        r.at("interactions").get<std::vector<std::pair<std::string, std::string>>>();
    state.recipe.squared_columns = r.at("squared_columns").get<std::vector<std::string>>();
    state.recipe.skew_log_columns = r.at("skew_log_columns").get<std::vector<std::string>>();
    state.fitted_on_rounds = doc.at("fitted_on_rounds").get<std::set<int>>();
    for (const auto& c : doc.at("columns")) {
      state.columns.push_back({c.at("name").get<std::string>(), c.at("log1p").get<bool>(),
                               c.at("impute_value").get<double>(), c.at("mean").get<double>(),
                               c.at("sd").get<double>(), c.at("constant").get<bool>()});
    }
    state.flag_columns = doc.at("flag_columns").get<std::vector<std::string>>();
    const auto& raw_sd = doc.at("raw_sd");
    for (std::size_t k = 0; k < kNumIndicators; ++k) {
      state.raw_sd[k] = raw_sd.at(std::string(indicator_name(static_cast<Indicator>(k)))).get<double>();
    }
    state.disaster_level_mode = parse_level(doc.at("disaster_level_mode").get<std::string>());
    state.seen_disaster_levels = doc.at("seen_disaster_levels").get<std::set<int>>();
    return state;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed transform state: ") + e.what());
  }
}

}  // namespace ews
