#include "searn/data.hpp"

#include <algorithm>

namespace searn {

DocumentCounts DocumentCounts::from_dense(const std::vector<int>& dense) {
  DocumentCounts d;
  for (std::size_t v = 0; v < dense.size(); ++v) {
    if (dense[v] > 0) {
      d.counts.emplace_back(static_cast<int>(v), dense[v]);
      d.total += dense[v];
    }
  }
  return d;
}

bool is_valid_tree(const DependencyTree& tree) {
  const int n = static_cast<int>(tree.size());
  for (int d = 1; d <= n; ++d) {
    int h = tree.heads[static_cast<std::size_t>(d - 1)];
    if (h < 0 || h > n || h == d) return false;
  }
  for (int d = 1; d <= n; ++d) {
    int cur = d;
    int steps = 0;
    while (cur != 0) {
      cur = tree.heads[static_cast<std::size_t>(cur - 1)];
      if (++steps > n) return false;  // cycle
    }
  }
  return true;
}

bool is_projective(const DependencyTree& tree) {
  const int n = static_cast<int>(tree.size());
  for (int d1 = 1; d1 <= n; ++d1) {
    int h1 = tree.heads[static_cast<std::size_t>(d1 - 1)];
    int a1 = std::min(h1, d1);
    int b1 = std::max(h1, d1);
    for (int d2 = 1; d2 <= n; ++d2) {
      int h2 = tree.heads[static_cast<std::size_t>(d2 - 1)];
      int a2 = std::min(h2, d2);
      int b2 = std::max(h2, d2);
      if (a1 < a2 && a2 < b1 && b1 < b2) return false;
    }
  }
  return true;
}

}  // namespace searn
