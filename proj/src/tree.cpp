#include "ews/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ews/error.hpp"

namespace ews {

int Tree::leaf_index(std::span<const double> row) const {
  int idx = 0;
  while (!nodes[idx].is_leaf()) {
    const auto& n = nodes[idx];
    idx = row[n.feature] < n.threshold ? n.left : n.right;
  }
  return idx;
}

std::size_t Tree::n_outputs() const {
  for (const auto& n : nodes) {
    if (n.is_leaf()) return n.value.size();
  }
  return 0;
}

int Tree::depth() const {
  std::function<int(int)> walk = [&](int i) -> int {
    const auto& n = nodes[i];
    return n.is_leaf() ? 0 : 1 + std::max(walk(n.left), walk(n.right));
  };
  return nodes.empty() ? 0 : walk(0);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

std::set<int> Tree::split_features() const {
  std::set<int> out;
  for (const auto& n : nodes) {
    if (!n.is_leaf()) out.insert(n.feature);
  }
  return out;
}

void Tree::check_integrity(std::size_t n_features) const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kModelIntegrity, what); };
  if (nodes.empty()) fail("tree has no nodes");
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes[i];
    if (!(node.cover > 0.0)) fail("node " + std::to_string(i) + " has zero cover");
    if (node.is_leaf()) {
      if (node.value.empty()) fail("leaf " + std::to_string(i) + " has no value");
      continue;
    }
    if (node.feature >= static_cast<int>(n_features)) {
      fail("node " + std::to_string(i) + " splits on unknown feature");
    }
    if (!std::isfinite(node.threshold)) fail("node " + std::to_string(i) + " threshold not finite");
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
      fail("node " + std::to_string(i) + " has invalid child indices");
    }
    if (nodes[node.left].cover + nodes[node.right].cover != node.cover) {
      fail("node " + std::to_string(i) + " cover differs from the sum of its children");
    }
  }
}

}  // namespace ews
