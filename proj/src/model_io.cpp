#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ews/error.hpp"
#include "ews/models.hpp"

namespace ews {

using nlohmann::json;

namespace {

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    json node = {{"feature", n.feature}, {"cover", n.cover}};
    if (n.is_leaf()) {
      node["value"] = n.value;
    } else {
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
    }
    nodes.push_back(std::move(node));
  }
  return nodes;
}

Tree tree_from_json(const json& j, std::size_t n_features) {
  Tree tree;
  for (const auto& node : j) {
    TreeNode n;
    n.feature = node.at("feature").get<int>();
    n.cover = node.at("cover").get<double>();
    if (n.is_leaf()) {
      n.value = node.at("value").get<std::vector<double>>();
    } else {
      n.threshold = node.at("threshold").get<double>();
      n.left = node.at("left").get<int>();
      n.right = node.at("right").get<int>();
    }
    tree.nodes.push_back(std::move(n));
  }
  tree.check_integrity(n_features);
  return tree;
}

json trees_to_json(const std::vector<Tree>& trees) {
  json out = json::array();
  for (const auto& t : trees) out.push_back(tree_to_json(t));
  return out;
}

std::vector<Tree> trees_from_json(const json& j, std::size_t n_features) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from_json(t, n_features));
  return out;
}

Objective parse_objective(const std::string& s) {
  if (s == "binary_logloss") return Objective::kBinaryLogloss;
  if (s == "softmax") return Objective::kSoftmax;
  throw Error(ErrorCode::kModelIntegrity, "unknown objective '" + s + "'");
}

Growth parse_growth(const std::string& s) {
  if (s == "depth_wise") return Growth::kDepthWise;
  if (s == "leaf_wise") return Growth::kLeafWise;
  throw Error(ErrorCode::kModelIntegrity, "unknown growth '" + s + "'");
}

json to_json(const LinearModel& m) {
  return {{"family", "logistic"},
          {"objective", "binary_logloss"},
          {"hyperparameters", {{"l2_lambda", m.l2_lambda}}},
          {"weights", m.weights},
          {"bias", m.bias},
          {"training_loss_trace", m.training_loss_trace}};
}

json to_json(const DecisionTree& m) {
  return {{"family", "tree"},
          {"objective", "gini"},
          {"n_classes", m.n_classes},
          {"hyperparameters",
           {{"max_depth", m.config.max_depth},
            {"min_samples_split", m.config.min_samples_split},
            {"min_gain", m.config.min_gain}}},
          {"trees", json::array({tree_to_json(m.tree)})}};
}

json to_json(const ForestModel& m) {
  return {{"family", "forest"},
          {"objective", "gini"},
          {"n_classes", m.n_classes},
          {"hyperparameters",
           {{"n_trees", m.config.n_trees},
            {"max_depth", m.config.max_depth},
            {"min_samples_split", m.config.min_samples_split},
            {"feature_subsample", m.config.feature_subsample},
            {"bootstrap", m.config.bootstrap},
            {"seed", m.config.seed}}},
          {"effective_feature_subsample", m.feature_subsample},
          {"bootstrap_seed", m.bootstrap_seed},
          {"trees", trees_to_json(m.trees)}};
}

json to_json(const BoostedEnsemble& m) {
  const auto& c = m.config;
  return {{"family", m.config.growth == Growth::kDepthWise ? "xgboost" : "lightgbm"},
          {"objective", objective_name(m.objective)},
          {"hyperparameters",
           {{"n_rounds", c.n_rounds},
            {"learning_rate", c.learning_rate},
            {"growth", growth_name(c.growth)},
            {"max_depth", c.max_depth},
            {"max_leaves", c.max_leaves},
            {"l2_lambda", c.l2_lambda},
            {"min_child_weight", c.min_child_weight},
            {"subsample", c.subsample},
            {"positive_weight", c.positive_weight},
            {"seed", c.seed}}},
          {"n_rounds", m.n_rounds},
          {"learning_rate", m.learning_rate},
          {"l2_lambda", m.l2_lambda},
          {"base_score", m.base_score},
          {"training_loss_trace", m.training_loss_trace},
          {"trees", trees_to_json(m.trees)}};
}

Model parse_model(const json& j) {
  const auto format = j.at("format").get<std::string>();
  if (format != kModelFormat) {
    throw Error(ErrorCode::kModelIntegrity, "unsupported model format '" + format + "'");
  }
  const auto names = j.at("feature_names").get<std::vector<std::string>>();
  const auto family = j.at("family").get<std::string>();
  const auto& hp = j.at("hyperparameters");

  if (family == "logistic") {
    LinearModel m;
    m.feature_names = names;
    m.l2_lambda = hp.at("l2_lambda").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.training_loss_trace = j.at("training_loss_trace").get<std::vector<double>>();
    if (m.weights.size() != names.size()) {
      throw Error(ErrorCode::kModelIntegrity, "weight count does not match feature names");
    }
    return m;
  }
  if (family == "tree") {
    DecisionTree m;
    m.feature_names = names;
    m.n_classes = j.at("n_classes").get<int>();
    m.config.max_depth = hp.at("max_depth").get<int>();
    m.config.min_samples_split = hp.at("min_samples_split").get<double>();
    m.config.min_gain = hp.at("min_gain").get<double>();
    const auto& trees = j.at("trees");
    if (trees.size() != 1) throw Error(ErrorCode::kModelIntegrity, "tree model needs one tree");
    m.tree = tree_from_json(trees[0], names.size());
    return m;
  }
  if (family == "forest") {
    ForestModel m;
    m.feature_names = names;
    m.n_classes = j.at("n_classes").get<int>();
    m.config.n_trees = hp.at("n_trees").get<int>();
    m.config.max_depth = hp.at("max_depth").get<int>();
    m.config.min_samples_split = hp.at("min_samples_split").get<double>();
    m.config.feature_subsample = hp.at("feature_subsample").get<int>();
    m.config.bootstrap = hp.at("bootstrap").get<bool>();
    m.config.seed = hp.at("seed").get<std::uint64_t>();
    m.feature_subsample = j.at("effective_feature_subsample").get<int>();
    m.bootstrap_seed = j.at("bootstrap_seed").get<std::uint64_t>();
    m.trees = trees_from_json(j.at("trees"), names.size());
    if (m.trees.empty()) throw Error(ErrorCode::kModelIntegrity, "forest has no trees");
    return m;
  }
  if (family == "xgboost" || family == "lightgbm") {
    BoostedEnsemble m;
    m.feature_names = names;
    m.objective = parse_objective(j.at("objective").get<std::string>());
    auto& c = m.config;
    c.n_rounds = hp.at("n_rounds").get<int>();
    c.learning_rate = hp.at("learning_rate").get<double>();
    c.growth = parse_growth(hp.at("growth").get<std::string>());
    c.max_depth = hp.at("max_depth").get<int>();
    c.max_leaves = hp.at("max_leaves").get<int>();
    c.l2_lambda = hp.at("l2_lambda").get<double>();
    c.min_child_weight = hp.at("min_child_weight").get<double>();
    c.subsample = hp.at("subsample").get<double>();
    c.positive_weight = hp.at("positive_weight").get<double>();
    c.seed = hp.at("seed").get<std::uint64_t>();
    m.n_rounds = j.at("n_rounds").get<int>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.l2_lambda = j.at("l2_lambda").get<double>();
    m.base_score = j.at("base_score").get<std::vector<double>>();
    m.training_loss_trace = j.at("training_loss_trace").get<std::vector<double>>();
    m.trees = trees_from_json(j.at("trees"), names.size());
    if (m.base_score.empty() ||
        m.trees.size() != static_cast<std::size_t>(m.n_rounds) * m.n_outputs()) {
      throw Error(ErrorCode::kModelIntegrity, "tree count does not match n_rounds");
    }
    return m;
  }
  throw Error(ErrorCode::kModelIntegrity, "unknown model family '" + family + "'");
}

}  // namespace

std::string model_to_json(const Model& model) {
  json j = std::visit([](const auto& m) { return to_json(m); }, model);
  j["format"] = kModelFormat;
  j["feature_names"] = model_feature_names(model);
  return j.dump(1) + "\n";
}

Model model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kModelIntegrity, std::string("malformed model JSON: ") + e.what());
  }
  try {
    return parse_model(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kModelIntegrity, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace ews
