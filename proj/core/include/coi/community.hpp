#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coi/catalog.hpp"
#include "coi/graph.hpp"

namespace coi {

/// Community per graph node (indexed like BimodalGraph nodes), numbered
/// densely from 0 in order of first appearance.
struct Partition {
  std::vector<int> assignment;
  double quality = 0;

  int community_count() const;
  bool operator==(const Partition&) const = default;
};

/// Relabels arbitrary community ids to 0, 1, ... by first appearance.
std::vector<int> normalize_labels(std::span<const int> labels);

/// Newman modularity of the graph read as undirected and unweighted:
/// sum over communities of e_c/m - resolution * (d_c / 2m)^2. Zero for a graph
/// without edges. Throws ValidationError if the assignment size is wrong.
double modularity(const BimodalGraph& graph, std::span<const int> assignment, double resolution = 1.0);

struct LeidenOptions {
  std::uint64_t seed = 0;
  int restarts = 10;
  double resolution = 1.0;
  /// Temperature of the randomized merge choice during refinement.
  double randomness = 0.01;
  /// Whole-algorithm passes per restart, each seeded with the previous
  /// result; stops early once a pass brings no gain.
  int max_passes = 32;
  /// Worker threads for independent restarts; the chosen partition does not
  /// depend on this.
  unsigned threads = 1;
};

/// Leiden community detection maximizing modularity. Runs `restarts`
/// independently seeded passes and keeps the best (ties: earliest restart).
/// Every returned community induces a connected subgraph. Throws
/// ValidationError for an empty graph or non-positive restart count.
Partition leiden(const BimodalGraph& graph, const LeidenOptions& options = {});

inline constexpr std::size_t kBruteForceNodeCap = 12;

/// Exhaustive modularity optimum over all set partitions. Throws
/// ValidationError above kBruteForceNodeCap nodes.
Partition brute_force_best_partition(const BimodalGraph& graph, double resolution = 1.0);

struct CommunityOfInterest {
  int id = 0;
  std::vector<CapecId> capecs;
  std::vector<std::string> actors;
  std::size_t nodes = 0;
  double pct_one_timers = 0;
  double mean_out_degree = 0;
  double std_out_degree = 0;
  double mean_posts = 0;
  double std_posts = 0;
  /// Most frequent tokens across the names of the community's CAPECs.
  std::vector<std::pair<std::string, int>> keywords;
};

/// Token counts over CAPEC names: lowercased alphanumeric words of at least
/// three characters, stop words removed, each token counted once per name.
/// Sorted by count (descending) then token; at most `top` entries.
std::vector<std::pair<std::string, int>> keyword_digest(std::span<const std::string> names, std::size_t top = 5);

/// Per-community overview: members, one-timer share, out-degree and
/// specialized-post statistics (sample deviations), keyword digest.
std::vector<CommunityOfInterest> summarize_communities(const BimodalGraph& graph, const Partition& partition,
                                                       const std::vector<std::vector<ActorPost>>& posts,
                                                       const CatalogSnapshot& snapshot, std::size_t top_keywords = 5);

nlohmann::json to_json(const CommunityOfInterest& community);

}  // namespace coi
