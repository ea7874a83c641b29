#pragma once

// Dense-matrix graph references: modularity from the adjacency matrix,
// exhaustive set-partition search, induced-subgraph connectivity.

#include <functional>
#include <queue>
#include <vector>

namespace oracle {

using Adjacency = std::vector<std::vector<int>>;

/// Q = 1/(2m) * sum_ij [A_ij - k_i k_j / (2m)] * [c_i == c_j]
inline double modularity(const Adjacency& a, const std::vector<int>& c, double gamma = 1.0) {
  const std::size_t n = a.size();
  std::vector<double> k(n, 0.0);
  double two_m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i] += a[i][j];
    two_m += k[i];
  }
  if (two_m == 0) return 0.0;
  double q = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (c[i] != c[j]) continue;
      q += a[i][j] - gamma * k[i] * k[j] / two_m;
    }
  }
  return q / two_m;
}

/// Calls `visit` with every set partition as a restricted growth string.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> rgs(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_label) {
    if (i == n) {
      visit(rgs);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      rgs[i] = l;
      rec(i + 1, std::max(max_label, l));
    }
  };
  if (n == 0) {
    visit(rgs);
    return;
  }
  rgs[0] = 0;
  rec(1, 0);
}

inline double best_modularity(const Adjacency& a) {
  double best = -1.0;
  for_each_partition(a.size(), [&](const std::vector<int>& c) { best = std::max(best, modularity(a, c)); });
  return best;
}

/// True when every community's induced subgraph is connected.
inline bool communities_connected(const Adjacency& a, const std::vector<int>& c) {
  const std::size_t n = a.size();
  std::vector<bool> seen(n, false);
  std::vector<bool> label_done;
  for (std::size_t s = 0; s < n; ++s) {
    const auto label = static_cast<std::size_t>(c[s]);
    if (label >= label_done.size()) label_done.resize(label + 1, false);
    if (seen[s]) continue;
    if (label_done[label]) return false;  // a second component with this label
    label_done[label] = true;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        if (a[u][v] && !seen[v] && c[v] == c[u]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
  }
  return true;
}

}  // namespace oracle
