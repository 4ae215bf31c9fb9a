#pragma once

#include <set>
#include <span>
#include <vector>

namespace ews {

// Flattened binary tree. A row goes left when row[feature] < threshold.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double cover = 0.0;          // training weight reaching the node
  std::vector<double> value;   // leaf output: class frequencies or one margin

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int leaf_index(std::span<const double> row) const;
  const std::vector<double>& predict(std::span<const double> row) const {
    return nodes[leaf_index(row)].value;
  }
  std::size_t n_outputs() const;
  int depth() const;
  std::size_t leaf_count() const;
  std::set<int> split_features() const;

  // Throws kModelIntegrity on dangling children, non-finite thresholds,
  // zero cover or cover(parent) != cover(left) + cover(right).
  void check_integrity(std::size_t n_features) const;

  bool operator==(const Tree&) const = default;
};

}  // namespace ews
