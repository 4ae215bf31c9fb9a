#pragma once

// Exact greedy tree growth over presorted feature columns, shared by the CART
// (Gini) learner and the Newton-boosting learner. Each open node keeps, for
// every feature, its rows in ascending feature order; splitting a node stably
// partitions those lists, so every level costs O(rows x features).

#include <algorithm>
#include <deque>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "ews/stats.hpp"
#include "ews/tree.hpp"

namespace ews::detail {

// Row indices of each feature column sorted by (value, row index), plus a
// column-major copy of the values for cache-friendly scans.
struct Presort {
  std::vector<std::vector<int>> order;
  std::vector<std::vector<double>> columns;

  static Presort build(const Matrix& x) {
    Presort p;
    p.order.resize(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) p.columns.push_back(x.column(f));
    for (std::size_t f = 0; f < x.cols(); ++f) {
      auto& ord = p.order[f];
      ord.resize(x.rows());
      std::iota(ord.begin(), ord.end(), 0);
      std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
    }
    return p;
  }
};

struct GrowthOptions {
  int max_depth = 4;             // < 0: unlimited
  int max_leaves = 0;            // 0: unlimited
  bool leaf_wise = false;        // best-first expansion instead of level order
  double min_gain = 0.0;
  double min_samples_split = 2.0;
  int features_per_split = 0;    // 0: all features
};

// Criterion concept:
//   using Stats = ...;
//   Stats empty() const;
//   void add(Stats&, int row, double weight) const;
//   Stats minus(const Stats& total, const Stats& part) const;
//   double cover(const Stats&) const;
//   bool is_pure(const Stats&) const;
//   double parent_score(const Stats& parent) const;  // evaluated once per node
//   // Split gain, or NaN when the split is not admissible.
//   double gain(double parent_score, const Stats& parent, const Stats& l, const Stats& r) const;
//   std::vector<double> leaf_value(const Stats&) const;
template <class Criterion>
class TreeGrower {
 public:
  using Stats = typename Criterion::Stats;

  TreeGrower(const Matrix& x, const Presort& presort, std::span<const double> weights,
             const Criterion& criterion, const GrowthOptions& options, std::mt19937_64* rng)
      : x_(x),
        presort_(presort),
        weights_(weights),
        crit_(criterion),
        opt_(options),
        rng_(rng),
        goes_left_(x.rows(), 0) {}

  Tree grow() {
    Tree tree;
    Open root;
    root.node = 0;
    root.depth = 0;
    root.stats = crit_.empty();
    sorted_.assign(x_.cols(), {});
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      sorted_[f].reserve(x_.rows());
      for (int r : presort_.order[f]) {
        if (weights_[r] > 0.0) sorted_[f].push_back(r);
      }
    }
    if (!sorted_.empty()) {
      for (int r : sorted_[0]) crit_.add(root.stats, r, weights_[r]);
      root.end = sorted_[0].size();
    } else {
      for (std::size_t r = 0; r < x_.rows(); ++r) {
        if (weights_[r] > 0.0) crit_.add(root.stats, static_cast<int>(r), weights_[r]);
      }
    }
    scratch_.resize(x_.rows());
    tree.nodes.push_back(make_leaf(root.stats));
    evaluate(root);

    std::size_t leaves = 1;
    std::deque<Open> open;
    open.push_back(std::move(root));
    while (!open.empty()) {
      if (opt_.max_leaves > 0 && leaves >= static_cast<std::size_t>(opt_.max_leaves)) break;
      auto pick = open.begin();
      if (opt_.leaf_wise) {
        // Highest gain first; ties go to the earliest-created node.
        for (auto it = open.begin(); it != open.end(); ++it) {
          if (it->best && (!pick->best || it->best->gain > pick->best->gain)) pick = it;
        }
      }
      Open cur = std::move(*pick);
      open.erase(pick);
      if (!cur.best) continue;

      auto [left, right] = split(cur);
      auto& parent = tree.nodes[cur.node];
      parent.feature = cur.best->feature;
      parent.threshold = cur.best->threshold;
      parent.value.clear();
      left.node = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(make_leaf(left.stats));
      right.node = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(make_leaf(right.stats));
      tree.nodes[cur.node].left = left.node;
      tree.nodes[cur.node].right = right.node;
      ++leaves;
      evaluate(left);
      evaluate(right);
      open.push_back(std::move(left));
      open.push_back(std::move(right));
    }
    return tree;
  }

 private:
  struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  // A node owns the segment [begin, end) of every per-feature row list.
  struct Open {
    int node = 0;
    int depth = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    Stats stats;
    std::optional<Candidate> best;
  };

  TreeNode make_leaf(const Stats& s) const {
    TreeNode n;
    n.cover = crit_.cover(s);
    n.value = crit_.leaf_value(s);
    return n;
  }

  std::vector<int> candidate_features() {
    std::vector<int> feats(x_.cols());
    std::iota(feats.begin(), feats.end(), 0);
    const int k = opt_.features_per_split;
    if (k > 0 && k < static_cast<int>(feats.size()) && rng_ != nullptr) {
      // Partial Fisher-Yates, then ascending order for deterministic tie-breaks.
      for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(feats.size()) - 1);
        std::swap(feats[i], feats[pick(*rng_)]);
      }
      feats.resize(k);
      std::sort(feats.begin(), feats.end());
    }
    return feats;
  }

  void evaluate(Open& node) {
    node.best.reset();
    if (opt_.max_depth >= 0 && node.depth >= opt_.max_depth) return;
    if (crit_.cover(node.stats) < opt_.min_samples_split) return;
    if (crit_.is_pure(node.stats)) return;
    const double parent_score = crit_.parent_score(node.stats);
    for (int f : candidate_features()) {
      const std::span<const int> rows(sorted_[f].data() + node.begin, node.end - node.begin);
      const auto& col = presort_.columns[f];
      if (rows.size() < 2 || col[rows.front()] == col[rows.back()]) continue;
      Stats left = crit_.empty();
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        crit_.add(left, rows[i], weights_[rows[i]]);
        const double lo = col[rows[i]];
        const double hi = col[rows[i + 1]];
        if (!(hi > lo)) continue;
        const Stats right = crit_.minus(node.stats, left);
        const double g = crit_.gain(parent_score, node.stats, left, right);
        if (!(g > 0.0) || g < opt_.min_gain) continue;
        if (!node.best || g > node.best->gain) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid > lo)) mid = hi;
          node.best = Candidate{f, mid, g};
        }
      }
    }
  }

  // Stable partition of the node's segment in every feature list.
  std::pair<Open, Open> split(const Open& cur) {
    const int f = cur.best->feature;
    const double thr = cur.best->threshold;
    const auto& col = presort_.columns[f];
    std::size_t n_left = 0;
    for (std::size_t i = cur.begin; i < cur.end; ++i) {
      const int r = sorted_[f][i];
      n_left += goes_left_[r] = col[r] < thr;
    }
    for (auto& list : sorted_) {
      std::size_t l = cur.begin, spill = 0;
      for (std::size_t i = cur.begin; i < cur.end; ++i) {
        const int r = list[i];
        if (goes_left_[r]) list[l++] = r;
        else scratch_[spill++] = r;
      }
      std::copy(scratch_.begin(), scratch_.begin() + spill, list.begin() + l);
    }
    Open left, right;
    left.depth = right.depth = cur.depth + 1;
    left.begin = cur.begin;
    left.end = right.begin = cur.begin + n_left;
    right.end = cur.end;
    left.stats = crit_.empty();
    right.stats = crit_.empty();
    // Child statistics accumulate in the split feature's value order.
    const auto& order = sorted_[f];
    for (std::size_t i = left.begin; i < left.end; ++i) crit_.add(left.stats, order[i], weights_[order[i]]);
    for (std::size_t i = right.begin; i < right.end; ++i) crit_.add(right.stats, order[i], weights_[order[i]]);
    return {std::move(left), std::move(right)};
  }

  const Matrix& x_;
  const Presort& presort_;
  std::span<const double> weights_;
  const Criterion& crit_;
  GrowthOptions opt_;
  std::mt19937_64* rng_;
  std::vector<char> goes_left_;
  std::vector<std::vector<int>> sorted_;  // per feature, rows in value order
  std::vector<int> scratch_;
};

}  // namespace ews::detail
