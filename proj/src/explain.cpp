#include "ews/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ews/error.hpp"

namespace ews {

namespace {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) / static_cast<double>(depth + 1);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next * (depth + 1) / (static_cast<double>(i + 1) * one);
      next = tmp - path[i].weight * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total weight of the path with element `index` removed.
double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = next * (depth + 1) / (static_cast<double>(i + 1) * one);
      total += tmp;
      next = path[i].weight - tmp * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      total += path[i].weight / (zero * (depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

class TreeShapRecursion {
 public:
  TreeShapRecursion(const Tree& tree, std::span<const double> row, int output,
                    std::vector<double>& phi)
      : tree_(tree), row_(row), output_(output), phi_(phi) {
    const int depth = tree.depth() + 2;
    buffer_.resize(static_cast<std::size_t>(depth) * (depth + 1) / 2 + depth);
  }

  void run() { recurse(0, buffer_.data(), 0, 1.0, 1.0, -1); }

 private:
  void recurse(int node_index, PathElement* parent_path, int depth, double zero_fraction,
               double one_fraction, int feature) {
    const auto& node = tree_.nodes[node_index];
    if (!(node.cover > 0.0)) {
      throw Error(ErrorCode::kModelIntegrity,
                  "zero-cover node " + std::to_string(node_index) + " in tree_shap");
    }
    // Each level works on its own copy of the path, stored after the parent's.
    PathElement* path = parent_path + depth;
    if (depth > 0) std::copy(parent_path, parent_path + depth, path);
    extend_path(path, depth, zero_fraction, one_fraction, feature);

    if (node.is_leaf()) {
      const double value = node.value[output_];
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const auto& el = path[i];
        phi_[el.feature] += w * (el.one_fraction - el.zero_fraction) * value;
      }
      return;
    }

    const bool go_left = row_[node.feature] < node.threshold;
    const int hot = go_left ? node.left : node.right;
    const int cold = go_left ? node.right : node.left;
    double incoming_zero = 1.0, incoming_one = 1.0;
    int split_depth = depth;
    for (int i = 1; i <= depth; ++i) {
      if (path[i].feature == node.feature) {
        incoming_zero = path[i].zero_fraction;
        incoming_one = path[i].one_fraction;
        unwind_path(path, depth, i);
        --split_depth;
        break;
      }
    }
    const double hot_share = tree_.nodes[hot].cover / node.cover;
    const double cold_share = tree_.nodes[cold].cover / node.cover;
    recurse(hot, path, split_depth + 1, incoming_zero * hot_share, incoming_one, node.feature);
    recurse(cold, path, split_depth + 1, incoming_zero * cold_share, 0.0, node.feature);
  }

  const Tree& tree_;
  std::span<const double> row_;
  int output_;
  std::vector<double>& phi_;
  std::vector<PathElement> buffer_;
};

void check_row(std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw Error(ErrorCode::kShape, "row has " + std::to_string(actual) + " features, model expects " +
                                       std::to_string(expected));
  }
}

std::string format_g3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

double expected_value(const Tree& tree, int output) {
  if (tree.nodes.empty()) throw Error(ErrorCode::kModelIntegrity, "empty tree");
  const double root_cover = tree.nodes[0].cover;
  if (!(root_cover > 0.0)) throw Error(ErrorCode::kModelIntegrity, "zero-cover root");
  double sum = 0.0;
  for (const auto& n : tree.nodes) {
    if (n.is_leaf()) sum += n.cover * n.value[output];
  }
  return sum / root_cover;
}

std::vector<double> tree_shap(const Tree& tree, std::span<const double> row, int output) {
  if (tree.nodes.empty()) throw Error(ErrorCode::kModelIntegrity, "empty tree");
  std::vector<double> phi(row.size(), 0.0);
  TreeShapRecursion(tree, row, output, phi).run();
  return phi;
}

ShapSet ensemble_shap(const Model& model, const FeatureMatrix& rows,
                      std::optional<int> explained_class) {
  if (std::holds_alternative<LinearModel>(model)) {
    throw Error(ErrorCode::kType, "ensemble_shap needs a tree model; use linear_shap");
  }
  const std::size_t p = model_feature_count(model);
  check_row(p, rows.cols());
  const int n_classes = model_n_classes(model);
  if (explained_class && (*explained_class < 0 || *explained_class >= n_classes)) {
    throw Error(ErrorCode::kDomain, "explained class " + std::to_string(*explained_class) +
                                        " outside [0, " + std::to_string(n_classes) + ")");
  }

  ShapSet out;
  out.model_family = model_family(model);
  out.feature_names = model_feature_names(model);
  std::vector<int> classes;
  if (n_classes == 2) {
    classes.assign(rows.rows(), explained_class.value_or(1));
  } else if (explained_class) {
    classes.assign(rows.rows(), *explained_class);
  } else {
    classes = predict_class(model, rows.values);
  }

  // (tree, output index, scale) triples per explained class plus the offset.
  struct Term {
    const Tree* tree;
    int output;
    double scale;
  };
  auto terms_for = [&](int cls, double& offset) {
    std::vector<Term> terms;
    offset = 0.0;
    if (const auto* b = std::get_if<BoostedEnsemble>(&model)) {
      const int outputs = b->n_outputs();
      const int k = outputs == 1 ? 0 : cls;
      offset = b->base_score[k];
      for (std::size_t t = k; t < b->trees.size(); t += outputs) {
        terms.push_back({&b->trees[t], 0, b->learning_rate});
      }
    } else if (const auto* f = std::get_if<ForestModel>(&model)) {
      const double scale = 1.0 / static_cast<double>(f->trees.size());
      for (const auto& t : f->trees) terms.push_back({&t, cls, scale});
    } else {
      terms.push_back({&std::get<DecisionTree>(model).tree, cls, 1.0});
    }
    return terms;
  };
  const bool boosted = std::holds_alternative<BoostedEnsemble>(model);
  out.output_space = boosted ? "margin" : "probability";

  std::vector<std::vector<Term>> class_terms(n_classes);
  std::vector<double> class_offset(n_classes, 0.0), class_base(n_classes, 0.0);
  for (int c = 0; c < n_classes; ++c) {
    class_terms[c] = terms_for(c, class_offset[c]);
    double base = class_offset[c];
    for (const auto& term : class_terms[c]) base += term.scale * expected_value(*term.tree, term.output);
    class_base[c] = base;
  }

  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto row = rows.values.row(i);
    const int cls = classes[i];
    ShapAttribution a;
    a.key = rows.keys[i];
    a.explained_class = cls;
    a.base_value = class_base[cls];
    a.contributions.assign(p, 0.0);
    double output = class_offset[cls];
    for (const auto& term : class_terms[cls]) {
      const auto phi = tree_shap(*term.tree, row, term.output);
      for (std::size_t j = 0; j < p; ++j) a.contributions[j] += term.scale * phi[j];
      output += term.scale * term.tree->predict(row)[term.output];
    }
    a.predicted_margin = output;
    out.rows.push_back(std::move(a));
  }
  return out;
}

std::vector<double> linear_shap(const LinearModel& model, std::span<const double> row,
                                std::span<const double> background_means) {
  check_row(model.weights.size(), row.size());
  check_row(model.weights.size(), background_means.size());
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = model.weights[j] * (row[j] - background_means[j]);
  }
  return out;
}

ShapSet linear_shap(const LinearModel& model, const FeatureMatrix& rows,
                    std::span<const double> background_means) {
  check_row(model.weights.size(), rows.cols());
  check_row(model.weights.size(), background_means.size());
  ShapSet out;
  out.model_family = "logistic";
  out.output_space = "margin";
  out.feature_names = model.feature_names;
  double base = model.bias;
  for (std::size_t j = 0; j < model.weights.size(); ++j) base += model.weights[j] * background_means[j];
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto row = rows.values.row(i);
    ShapAttribution a;
    a.key = rows.keys[i];
    a.explained_class = 1;
    a.base_value = base;
    a.contributions = linear_shap(model, row, background_means);
    double margin = model.bias;
    for (std::size_t j = 0; j < row.size(); ++j) margin += model.weights[j] * row[j];
    a.predicted_margin = margin;
    out.rows.push_back(std::move(a));
  }
  return out;
}

std::vector<double> column_means(const Matrix& x) {
  std::vector<double> out(x.cols(), 0.0);
  if (x.rows() == 0) throw Error(ErrorCode::kDomain, "column_means: no rows");
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out[j] += x(i, j);
  }
  for (double& v : out) v /= static_cast<double>(x.rows());
  return out;
}

ShapSet explain_model(const Model& model, const FeatureMatrix& rows, const Matrix& background,
                      std::optional<int> explained_class) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    return linear_shap(*lin, rows, column_means(background));
  }
  return ensemble_shap(model, rows, explained_class);
}

std::vector<std::pair<std::string, double>> global_importance(const ShapSet& set) {
  if (set.rows.empty()) throw Error(ErrorCode::kDomain, "global_importance: no attributions");
  const std::size_t p = set.feature_names.size();
  std::vector<double> sums(p, 0.0);
  for (const auto& a : set.rows) {
    check_row(p, a.contributions.size());
    for (std::size_t j = 0; j < p; ++j) sums[j] += std::abs(a.contributions[j]);
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < p; ++j) {
    out.emplace_back(set.feature_names[j], sums[j] / static_cast<double>(set.rows.size()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

const char* direction_name(Direction d) {
  return d == Direction::kTowardDistress ? "toward-distress" : "toward-stability";
}

Narrative render_narrative(const ShapAttribution& attribution,
                           const std::vector<std::string>& feature_names,
                           std::span<const double> row, int k) {
  const std::size_t p = attribution.contributions.size();
  check_row(p, feature_names.size());
  check_row(p, row.size());
  Narrative out;
  out.key = attribution.key;
  const double shift = attribution.predicted_margin - attribution.base_value;
  if (shift != 0.0) {
    out.direction = shift > 0.0 ? Direction::kTowardDistress : Direction::kTowardStability;
  } else {
    out.direction = attribution.base_value < 0.0 ? Direction::kTowardStability
                                                 : Direction::kTowardDistress;
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(attribution.contributions[a]) > std::abs(attribution.contributions[b]);
  });
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), p);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = order[i];
    const double c = attribution.contributions[j];
    const Direction d = c > 0.0   ? Direction::kTowardDistress
                        : c < 0.0 ? Direction::kTowardStability
                                  : out.direction;
    NarrativeFactor f;
    f.feature = feature_names[j];
    f.value = row[j];
    f.contribution = c;
    f.phrase = f.feature + " at " + format_g3(f.value) + " pushed the prediction toward " +
               (d == Direction::kTowardDistress ? "distress" : "stability") + " by " +
               format_g3(std::abs(c));
    out.top_factors.push_back(std::move(f));
  }
  out.summary = "Household " + std::to_string(attribution.key.household_id) + ", round " +
                std::to_string(attribution.key.round) + ": prediction moved " +
                (out.direction == Direction::kTowardDistress ? "toward distress" : "toward stability") +
                " by " + format_g3(std::abs(shift)) + " from a base of " +
                format_g3(attribution.base_value) + ".";
  return out;
}

std::string format_attributions_csv(const ShapSet& set) {
  std::string out = "household_id,round,explained_class,base_value";
  for (const auto& name : set.feature_names) out += "," + name;
  out += ",predicted_margin\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& a : set.rows) {
    out += std::to_string(a.key.household_id) + "," + std::to_string(a.key.round) + "," +
           std::to_string(a.explained_class) + "," + num(a.base_value);
    for (double c : a.contributions) out += "," + num(c);
    out += "," + num(a.predicted_margin) + "\n";
  }
  return out;
}

}  // namespace ews
