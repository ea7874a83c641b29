#include <algorithm>
#include <unordered_map>

#include "coi/community.hpp"
#include "coi/error.hpp"

namespace coi {

int Partition::community_count() const {
  if (assignment.empty()) return 0;
  return *std::max_element(assignment.begin(), assignment.end()) + 1;
}

std::vector<int> normalize_labels(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) {
    auto [it, inserted] = remap.try_emplace(label, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

double modularity(const BimodalGraph& graph, std::span<const int> assignment, double resolution) {
  if (assignment.size() != graph.node_count()) {
    throw ValidationError("modularity: assignment covers " + std::to_string(assignment.size()) +
                          " nodes, graph has " + std::to_string(graph.node_count()));
  }
  if (graph.edge_count() == 0) return 0.0;
  const auto labels = normalize_labels(assignment);
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> internal(static_cast<std::size_t>(k), 0.0);
  std::vector<double> degree(static_cast<std::size_t>(k), 0.0);
  for (const auto& e : graph.edges()) {
    const int a = labels[e.actor];
    const int c = labels[graph.capec_node(e.capec)];
    degree[static_cast<std::size_t>(a)] += 1.0;
    degree[static_cast<std::size_t>(c)] += 1.0;
    if (a == c) internal[static_cast<std::size_t>(a)] += 1.0;
  }
  const double m = static_cast<double>(graph.edge_count());
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    const double share = degree[c] / (2.0 * m);
    q += internal[c] / m - resolution * share * share;
  }
  return q;
}

Partition brute_force_best_partition(const BimodalGraph& graph, double resolution) {
  const std::size_t n = graph.node_count();
  if (n > kBruteForceNodeCap) {
    throw ValidationError("brute_force_best_partition: " + std::to_string(n) + " nodes exceeds the cap of " +
                          std::to_string(kBruteForceNodeCap));
  }
  Partition best;
  best.assignment.assign(n, 0);
  best.quality = modularity(graph, best.assignment, resolution);
  if (n == 0) return best;

  // Restricted growth strings enumerate every set partition exactly once.
  std::vector<int> rgs(n, 0);
  auto visit = [&](auto&& self, std::size_t i, int max_label) -> void {
    if (i == n) {
      const double q = modularity(graph, rgs, resolution);
      if (q > best.quality) {
        best.quality = q;
        best.assignment = rgs;
      }
      return;
    }
    for (int label = 0; label <= max_label + 1; ++label) {
      rgs[i] = label;
      self(self, i + 1, std::max(max_label, label));
    }
  };
  visit(visit, 1, 0);
  return best;
}

}  // namespace coi
