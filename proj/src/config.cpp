#include <algorithm>
#include <climits>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "ews/error.hpp"
#include "ews/pipeline.hpp"

namespace ews {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kConfig, path + ": " + what);
}

void convert(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) fail(path, "expected a number");
  out = j.get<double>();
}

void convert(const json& j, const std::string& path, int& out) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT_MIN || v > INT_MAX) fail(path, "integer out of range");
  out = static_cast<int>(v);
}

void convert(const json& j, const std::string& path, std::uint64_t& out) {
  if (!j.is_number_unsigned()) fail(path, "expected a nonnegative integer");
  out = j.get<std::uint64_t>();
}

void convert(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  out = j.get<bool>();
}

void convert(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) fail(path, "expected a string");
  out = j.get<std::string>();
}

void convert(const json& j, const std::string& path, std::pair<std::string, std::string>& out) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a pair of column names");
  convert(j[0], path + "[0]", out.first);
  convert(j[1], path + "[1]", out.second);
}

template <class T>
void convert(const json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) fail(path, "expected an array");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T v{};
    convert(j[i], path + "[" + std::to_string(i) + "]", v);
    out.push_back(std::move(v));
  }
}

void convert(const json& j, const std::string& path, std::set<int>& out) {
  std::vector<int> v;
  convert(j, path, v);
  out = {v.begin(), v.end()};
  if (out.size() != v.size()) fail(path, "duplicate round");
}

// One JSON object of the config. Keys not read before finish() are rejected.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_) return;
    const auto it = node_->find(key);
    if (it != node_->end()) convert(*it, join(key), out);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    const json* sub = nullptr;
    if (node_) {
      const auto it = node_->find(key);
      if (it != node_->end()) sub = &*it;
    }
    return Section(sub, join(key));
  }

  void finish() const {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!seen_.contains(it.key())) fail(join(it.key()), "unknown key");
    }
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_boost(Section s, BoostConfig& c, bool leaf_wise) {
  s.read("n_rounds", c.n_rounds);
  s.read("learning_rate", c.learning_rate);
  s.read("max_depth", c.max_depth);
  if (leaf_wise) s.read("max_leaves", c.max_leaves);
  s.read("l2_lambda", c.l2_lambda);
  s.read("min_child_weight", c.min_child_weight);
  s.read("subsample", c.subsample);
  s.read("positive_weight", c.positive_weight);
  s.finish();
}

ordered_json boost_json(const BoostConfig& c, bool leaf_wise) {
  ordered_json j = {{"n_rounds", c.n_rounds}, {"learning_rate", c.learning_rate},
                    {"max_depth", c.max_depth}};
  if (leaf_wise) j["max_leaves"] = c.max_leaves;
  j["l2_lambda"] = c.l2_lambda;
  j["min_child_weight"] = c.min_child_weight;
  j["subsample"] = c.subsample;
  j["positive_weight"] = c.positive_weight;
  return j;
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

// Re-raises a nested validation failure as a configuration error.
template <class F>
void nested(const std::string& path, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail(path, e.what());
  }
}

void check_boost(const BoostConfig& c, const std::string& path) {
  require(c.n_rounds >= 1, path + ".n_rounds", "must be >= 1");
  require(c.learning_rate > 0.0 && c.learning_rate <= 1.0, path + ".learning_rate",
          "must lie in (0, 1]");
  if (c.growth == Growth::kDepthWise) {
    require(c.max_depth >= 1, path + ".max_depth", "must be >= 1");
  } else {
    require(c.max_leaves >= 2, path + ".max_leaves", "must be >= 2");
  }
  require(c.l2_lambda >= 0.0, path + ".l2_lambda", "must be >= 0");
  require(c.min_child_weight >= 0.0, path + ".min_child_weight", "must be >= 0");
  require(c.subsample > 0.0 && c.subsample <= 1.0, path + ".subsample", "must lie in (0, 1]");
  require(c.positive_weight > 0.0, path + ".positive_weight", "must be > 0");
}

std::string line_context(std::string_view text, std::size_t byte) {
  // nlohmann reports the 1-based position of the last character read.
  const std::size_t pos = std::min(byte > 0 ? byte - 1 : 0, text.size());
  std::size_t line = 1, line_start = 0;
  for (std::size_t i = 0; i < pos; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  const std::size_t line_end = std::min(text.find('\n', line_start), text.size());
  const std::size_t column = pos - line_start + 1;
  return std::to_string(line) + ":" + std::to_string(column) + "\n  " +
         std::string(text.substr(line_start, line_end - line_start)) + "\n  " +
         std::string(column - 1, ' ') + "^";
}

}  // namespace

void PipelineConfig::set_seed(std::uint64_t value) {
  seed = value;
  generator.seed = value;
  models.random_forest.seed = value + 1;
  models.xgboost.seed = value + 2;
  models.lightgbm.seed = value + 2;
  shock.seed = value + 3;
}

void PipelineConfig::validate() const {
  nested("generator", [&] { generator.validate(); });
  nested("features", [&] { recipe.validate(generator.n_rounds); });
  nested("split", [&] { split.validate(); });
  require(!split.validation_rounds.empty(), "split.validation_rounds", "must not be empty");
  require(!split.test_rounds.empty(), "split.test_rounds", "must not be empty");
  for (const auto* rounds : {&split.train_rounds, &split.validation_rounds, &split.test_rounds}) {
    for (int r : *rounds) {
      require(r >= 1 && r <= generator.n_rounds, "split",
              "round " + std::to_string(r) + " outside 1.." + std::to_string(generator.n_rounds));
    }
  }

  const auto& lg = models.logistic;
  require(lg.l2_lambda >= 0.0, "models.logistic.l2_lambda", "must be >= 0");
  require(lg.max_iters >= 1, "models.logistic.max_iters", "must be >= 1");
  require(lg.tolerance >= 0.0, "models.logistic.tolerance", "must be >= 0");
  require(lg.positive_weight > 0.0, "models.logistic.positive_weight", "must be > 0");
  const auto& dt = models.decision_tree;
  require(dt.max_depth >= 1, "models.decision_tree.max_depth", "must be >= 1");
  require(dt.min_samples_split >= 2.0, "models.decision_tree.min_samples_split", "must be >= 2");
  require(dt.min_gain >= 0.0, "models.decision_tree.min_gain", "must be >= 0");
  const auto& rf = models.random_forest;
  require(rf.n_trees >= 1, "models.random_forest.n_trees", "must be >= 1");
  require(rf.max_depth >= 1, "models.random_forest.max_depth", "must be >= 1");
  require(rf.min_samples_split >= 2.0, "models.random_forest.min_samples_split", "must be >= 2");
  require(rf.feature_subsample >= 0, "models.random_forest.feature_subsample", "must be >= 0");
  check_boost(models.xgboost, "models.xgboost");
  check_boost(models.lightgbm, "models.lightgbm");

  const auto& t = models.tuning;
  if (t.enabled) {
    require(!t.learning_rates.empty(), "models.tuning.learning_rates", "must not be empty");
    require(!t.max_depths.empty(), "models.tuning.max_depths", "must not be empty");
    require(!t.max_leaves.empty(), "models.tuning.max_leaves", "must not be empty");
    require(t.learning_rates.size() * t.max_depths.size() <= 9, "models.tuning",
            "learning_rates x max_depths exceeds 9 grid points");
    require(t.learning_rates.size() * t.max_leaves.size() <= 9, "models.tuning",
            "learning_rates x max_leaves exceeds 9 grid points");
    for (double lr : t.learning_rates) {
      require(lr > 0.0 && lr <= 1.0, "models.tuning.learning_rates", "values must lie in (0, 1]");
    }
    for (int d : t.max_depths) require(d >= 1, "models.tuning.max_depths", "values must be >= 1");
    for (int l : t.max_leaves) require(l >= 2, "models.tuning.max_leaves", "values must be >= 2");
  }

  nested("shock", [&] { shock.validate(); });

  require(!report.output_dir.empty(), "report.output_dir", "must not be empty");
  require(report.threshold > 0.0 && report.threshold < 1.0, "report.threshold",
          "must lie in (0, 1)");
  require(report.top_k >= 1, "report.top_k", "must be >= 1");
  require(report.narratives >= 0, "report.narratives", "must be >= 0");
  require(report.drift_threshold > 0.0, "report.drift_threshold", "must be > 0");
}

PipelineConfig parse_config(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::string detail = e.what();
    if (const auto p = detail.find(": syntax error"); p != std::string::npos) detail = detail.substr(p + 2);
    throw Error(ErrorCode::kConfig, source + ":" + line_context(text, e.byte) + "\n" + detail);
  }

  PipelineConfig c;
  Section root(&doc, "");
  std::uint64_t seed = c.seed;
  root.read("seed", seed);

  auto g = root.child("generator");
  g.read("n_households", c.generator.n_households);
  g.read("n_rounds", c.generator.n_rounds);
  g.read("binary_signal_strength", c.generator.binary_signal_strength);
  g.read("drift_rotation", c.generator.drift_rotation);
  g.read("severity_noise_sd", c.generator.severity_noise_sd);
  g.read("prevalence_target", c.generator.prevalence_target);
  g.read("missing_fraction", c.generator.missing_fraction);
  g.finish();

  auto f = root.child("features");
  f.read("lag_columns", c.recipe.lag_columns);
  f.read("rolling_columns", c.recipe.rolling_columns);
  f.read("rolling_window", c.recipe.rolling_window);
  f.read("velocity_columns", c.recipe.velocity_columns);
  f.read("interactions", c.recipe.interactions);
  f.read("squared_columns", c.recipe.squared_columns);
  f.read("skew_log_columns", c.recipe.skew_log_columns);
  f.finish();

  auto s = root.child("split");
  s.read("train_rounds", c.split.train_rounds);
  s.read("validation_rounds", c.split.validation_rounds);
  s.read("test_rounds", c.split.test_rounds);
  s.finish();

  auto m = root.child("models");
  auto lg = m.child("logistic");
  lg.read("l2_lambda", c.models.logistic.l2_lambda);
  lg.read("max_iters", c.models.logistic.max_iters);
  lg.read("tolerance", c.models.logistic.tolerance);
  lg.read("positive_weight", c.models.logistic.positive_weight);
  lg.finish();
  auto dt = m.child("decision_tree");
  dt.read("max_depth", c.models.decision_tree.max_depth);
  dt.read("min_samples_split", c.models.decision_tree.min_samples_split);
  dt.read("min_gain", c.models.decision_tree.min_gain);
  dt.finish();
  auto rf = m.child("random_forest");
  rf.read("n_trees", c.models.random_forest.n_trees);
  rf.read("max_depth", c.models.random_forest.max_depth);
  rf.read("min_samples_split", c.models.random_forest.min_samples_split);
  rf.read("feature_subsample", c.models.random_forest.feature_subsample);
  rf.read("bootstrap", c.models.random_forest.bootstrap);
  rf.finish();
  read_boost(m.child("xgboost"), c.models.xgboost, false);
  read_boost(m.child("lightgbm"), c.models.lightgbm, true);
  auto t = m.child("tuning");
  t.read("enabled", c.models.tuning.enabled);
  t.read("learning_rates", c.models.tuning.learning_rates);
  t.read("max_depths", c.models.tuning.max_depths);
  t.read("max_leaves", c.models.tuning.max_leaves);
  t.finish();
  m.finish();

  auto sh = root.child("shock");
  sh.read("target_columns", c.shock.target_columns);
  std::string mode = shock_mode_name(c.shock.mode);
  std::string direction = shock_direction_name(c.shock.direction);
  sh.read("mode", mode);
  sh.read("magnitude", c.shock.magnitude);
  sh.read("direction", direction);
  sh.finish();
  c.shock.mode = parse_shock_mode(mode);
  c.shock.direction = parse_shock_direction(direction);

  auto r = root.child("report");
  r.read("output_dir", c.report.output_dir);
  r.read("threshold", c.report.threshold);
  r.read("top_k", c.report.top_k);
  r.read("narratives", c.report.narratives);
  r.read("drift_threshold", c.report.drift_threshold);
  r.finish();
  root.finish();

  c.set_seed(seed);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string config_to_json(const PipelineConfig& c, bool with_output_dir) {
  const auto& g = c.generator;
  const auto& r = c.recipe;
  const auto& m = c.models;
  ordered_json j;
  j["seed"] = c.seed;
  j["generator"] = {{"n_households", g.n_households},
                    {"n_rounds", g.n_rounds},
                    {"binary_signal_strength", g.binary_signal_strength},
                    {"drift_rotation", g.drift_rotation},
                    {"severity_noise_sd", g.severity_noise_sd},
                    {"prevalence_target", g.prevalence_target},
                    {"missing_fraction", g.missing_fraction}};
  j["features"] = {{"lag_columns", r.lag_columns},
                   {"rolling_columns", r.rolling_columns},
                   {"rolling_window", r.rolling_window},
                   {"velocity_columns", r.velocity_columns},
                   {"interactions", r.interactions},
                   {"squared_columns", r.squared_columns},
                   {"skew_log_columns", r.skew_log_columns}};
  j["split"] = {{"train_rounds", c.split.train_rounds},
                {"validation_rounds", c.split.validation_rounds},
                {"test_rounds", c.split.test_rounds}};
  j["models"] = {
      {"logistic",
       {{"l2_lambda", m.logistic.l2_lambda},
        {"max_iters", m.logistic.max_iters},
        {"tolerance", m.logistic.tolerance},
        {"positive_weight", m.logistic.positive_weight}}},
      {"decision_tree",
       {{"max_depth", m.decision_tree.max_depth},
        {"min_samples_split", m.decision_tree.min_samples_split},
        {"min_gain", m.decision_tree.min_gain}}},
      {"random_forest",
       {{"n_trees", m.random_forest.n_trees},
        {"max_depth", m.random_forest.max_depth},
        {"min_samples_split", m.random_forest.min_samples_split},
        {"feature_subsample", m.random_forest.feature_subsample},
        {"bootstrap", m.random_forest.bootstrap}}},
      {"xgboost", boost_json(m.xgboost, false)},
      {"lightgbm", boost_json(m.lightgbm, true)},
      {"tuning",
       {{"enabled", m.tuning.enabled},
        {"learning_rates", m.tuning.learning_rates},
        {"max_depths", m.tuning.max_depths},
        {"max_leaves", m.tuning.max_leaves}}}};
  j["shock"] = {{"target_columns", c.shock.target_columns},
                {"mode", shock_mode_name(c.shock.mode)},
                {"magnitude", c.shock.magnitude},
                {"direction", shock_direction_name(c.shock.direction)}};
  j["report"] = ordered_json::object();
  if (with_output_dir) j["report"]["output_dir"] = c.report.output_dir;
  j["report"]["threshold"] = c.report.threshold;
  j["report"]["top_k"] = c.report.top_k;
  j["report"]["narratives"] = c.report.narratives;
  j["report"]["drift_threshold"] = c.report.drift_threshold;
  return j.dump(2) + "\n";
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace ews
