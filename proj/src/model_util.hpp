#pragma once

#include <algorithm>
#include <numeric>

#include "ews/features.hpp"

namespace ews::detail {

// Rows sorted by key, so training never depends on input row order.
inline FeatureMatrix key_ordered(const FeatureMatrix& m) {
  if (std::is_sorted(m.keys.begin(), m.keys.end())) return m;
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return m.keys[a] < m.keys[b]; });
  return m.select(order);
}

// Placeholder names f0..f{n-1} for models trained on a bare matrix.
inline std::vector<std::string> positional_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back("f" + std::to_string(j));
  return out;
}

}  // namespace ews::detail
