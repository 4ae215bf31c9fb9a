#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. They are deliberately naive: brute-force enumeration, pair counting
// and threshold sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "ews/models.hpp"
#include "ews/panel_data.hpp"
#include "ews/tree.hpp"

namespace oracle {

// Expected leaf value with features in `known` following `row` and the rest
// averaged by child cover.
inline double cover_value(const ews::Tree& tree, std::span<const double> row,
                          const std::set<int>& known, int node = 0, int output = 0) {
  const auto& n = tree.nodes[node];
  if (n.is_leaf()) return n.value[output];
  if (known.contains(n.feature)) {
    return cover_value(tree, row, known, row[n.feature] < n.threshold ? n.left : n.right, output);
  }
  const double l = tree.nodes[n.left].cover;
  const double r = tree.nodes[n.right].cover;
  return (l * cover_value(tree, row, known, n.left, output) +
          r * cover_value(tree, row, known, n.right, output)) /
         (l + r);
}

// Shapley values by enumerating every coalition of the tree's split features;
// features the tree never uses get 0.
inline std::vector<double> brute_force_shapley(const ews::Tree& tree, std::span<const double> row,
                                               int output = 0) {
  const auto used = tree.split_features();
  const std::vector<int> players(used.begin(), used.end());
  const int m = static_cast<int>(players.size());
  std::vector<double> factorial(m + 1, 1.0);
  for (int i = 1; i <= m; ++i) factorial[i] = factorial[i - 1] * i;
  std::vector<double> phi(row.size(), 0.0);
  for (int j = 0; j < m; ++j) {
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      if (mask & (1u << j)) continue;
      std::set<int> s;
      int size = 0;
      for (int k = 0; k < m; ++k) {
        if (mask & (1u << k)) {
          s.insert(players[k]);
          ++size;
        }
      }
      const double weight = factorial[size] * factorial[m - size - 1] / factorial[m];
      const double without = cover_value(tree, row, s, 0, output);
      s.insert(players[j]);
      phi[players[j]] += weight * (cover_value(tree, row, s, 0, output) - without);
    }
  }
  return phi;
}

// Random tree with consistent covers: internal cover = sum of child covers.
inline ews::Tree random_tree(std::mt19937_64& rng, int n_features, int max_depth,
                             int max_split_features) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_feature(0, std::min(n_features, max_split_features) - 1);
  std::vector<int> feature_map(n_features);
  for (int i = 0; i < n_features; ++i) feature_map[i] = i;
  std::shuffle(feature_map.begin(), feature_map.end(), rng);

  ews::Tree tree;
  tree.nodes.emplace_back();
  struct Pending {
    int node;
    int depth;
  };
  std::vector<Pending> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [node, depth] = stack.back();
    stack.pop_back();
    const bool split = depth < max_depth && (depth == 0 || unit(rng) < 0.8);
    if (!split) {
      tree.nodes[node].value = {unit(rng) * 4.0 - 2.0};
      tree.nodes[node].cover = 1.0 + std::floor(unit(rng) * 20.0);
      continue;
    }
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    tree.nodes[node].feature = feature_map[pick_feature(rng)];
    tree.nodes[node].threshold = unit(rng) * 2.0 - 1.0;
    tree.nodes[node].left = left;
    tree.nodes[node].right = left + 1;
    stack.push_back({left, depth + 1});
    stack.push_back({left + 1, depth + 1});
  }
  // Children were appended after parents, so a reverse sweep fills covers.
  for (int i = static_cast<int>(tree.nodes.size()) - 1; i >= 0; --i) {
    auto& n = tree.nodes[i];
    if (!n.is_leaf()) n.cover = tree.nodes[n.left].cover + tree.nodes[n.right].cover;
  }
  return tree;
}

// Pair counting over all positive x negative pairs, ties 1/2.
inline double pair_count_auc(std::span<const double> s, std::span<const int> y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Sum over distinct thresholds t (descending) of precision(t) x (recall(t) -
// recall(previous t)), with "score >= t" as the positive call.
inline double threshold_sweep_ap(std::span<const double> s, std::span<const int> y) {
  std::vector<double> thresholds(s.begin(), s.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double positives = 0.0;
  for (int v : y) positives += v;
  double ap = 0.0, last_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, called = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) {
        called += 1.0;
        tp += y[i];
      }
    }
    const double recall = tp / positives;
    ap += (recall - last_recall) * (tp / called);
    last_recall = recall;
  }
  return ap;
}

// Central differences of the logistic objective in every weight and the bias;
// returns the largest relative error against the analytic gradient.
inline double logistic_gradient_error(const ews::Matrix& x, std::span<const int> y,
                                      std::vector<double> w, double b, double lambda) {
  const double eps = 1e-5;
  const auto analytic = ews::logistic_objective(x, y, w, b, lambda);
  double worst = 0.0;
  auto rel = [](double a, double n) { return std::abs(a - n) / std::max(1e-8, std::max(std::abs(a), std::abs(n))); };
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double keep = w[j];
    w[j] = keep + eps;
    const double up = ews::logistic_objective(x, y, w, b, lambda).loss;
    w[j] = keep - eps;
    const double down = ews::logistic_objective(x, y, w, b, lambda).loss;
    w[j] = keep;
    worst = std::max(worst, rel(analytic.grad_weights[j], (up - down) / (2 * eps)));
  }
  const double up = ews::logistic_objective(x, y, w, b + eps, lambda).loss;
  const double down = ews::logistic_objective(x, y, w, b - eps, lambda).loss;
  return std::max(worst, rel(analytic.grad_bias, (up - down) / (2 * eps)));
}

// Moment skewness m3 / m2^{3/2} computed directly.
inline double moment_skewness(const std::vector<double>& v) {
  double mu = 0.0;
  for (double x : v) mu += x;
  mu /= static_cast<double>(v.size());
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    m2 += (x - mu) * (x - mu);
    m3 += (x - mu) * (x - mu) * (x - mu);
  }
  m2 /= static_cast<double>(v.size());
  m3 /= static_cast<double>(v.size());
  return m3 / std::pow(m2, 1.5);
}

inline double direct_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// PSI with decile edges computed by sorting, independent of the library's
// quantile routine (type-7 interpolation, distinct edges below the maximum).
inline double psi_by_hand(std::vector<double> ref, const std::vector<double>& cur) {
  std::sort(ref.begin(), ref.end());
  const double n = static_cast<double>(ref.size());
  std::vector<double> edges;
  for (int d = 1; d <= 9; ++d) {
    const double h = (n - 1.0) * d / 10.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double q = ref[lo] + (h - lo) * (ref[std::min(lo + 1, ref.size() - 1)] - ref[lo]);
    if (q < ref.back() && (edges.empty() || q > edges.back())) edges.push_back(q);
  }
  auto proportions = [&](const std::vector<double>& v) {
    std::vector<double> p(edges.size() + 1, 0.0);
    for (double x : v) {
      std::size_t b = 0;
      while (b < edges.size() && x > edges[b]) ++b;
      p[b] += 1.0 / static_cast<double>(v.size());
    }
    return p;
  };
  const auto pr = proportions(ref);
  const auto pc = proportions(cur);
  double psi = 0.0;
  for (std::size_t b = 0; b < pr.size(); ++b) {
    const double r = std::max(pr[b], 1e-4);
    const double c = std::max(pc[b], 1e-4);
    psi += (c - r) * std::log(c / r);
  }
  return psi;
}

}  // namespace oracle
