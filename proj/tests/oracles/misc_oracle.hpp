#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace oracle {

/// Nearest-rank percentile of codes 1..3 by counting: the smallest code whose
/// cumulative count reaches ceil(p/100 * n).
inline int percentile_code(const std::vector<int>& values, double p) {
  const auto n = static_cast<double>(values.size());
  const double rank = std::max(1.0, std::ceil(p / 100.0 * n - 1e-9));
  std::size_t cumulative = 0;
  for (int code = 1; code <= 3; ++code) {
    cumulative += static_cast<std::size_t>(std::count(values.begin(), values.end(), code));
    if (static_cast<double>(cumulative) >= rank) return code;
  }
  return 3;
}

/// Agreement under the best one-to-one community matching, by trying every
/// injection of truth labels into recovered labels (small label counts only).
inline double agreement_by_permutation(const std::map<std::string, int>& truth,
                                       const std::map<std::string, int>& recovered) {
  int t_max = 0, r_max = 0;
  for (auto& [a, t] : truth) t_max = std::max(t_max, t + 1);
  for (auto& [a, r] : recovered) r_max = std::max(r_max, r + 1);
  std::vector<std::vector<int>> overlap(static_cast<std::size_t>(t_max), std::vector<int>(static_cast<std::size_t>(r_max), 0));
  for (auto& [actor, t] : truth) {
    auto it = recovered.find(actor);
    if (it != recovered.end()) ++overlap[static_cast<std::size_t>(t)][static_cast<std::size_t>(it->second)];
  }
  // Pad the recovered side with dummy columns so every truth row can go unmatched.
  const int cols = std::max(r_max, 0) + t_max;
  std::vector<int> perm(static_cast<std::size_t>(cols));
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int s = 0;
    for (int t = 0; t < t_max; ++t) {
      const int c = perm[static_cast<std::size_t>(t)];
      if (c < r_max) s += overlap[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
    }
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return truth.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(truth.size());
}

}  // namespace oracle
