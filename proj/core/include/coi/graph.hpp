#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coi/catalog.hpp"
#include "coi/ingest.hpp"
#include "coi/util/stats.hpp"

namespace coi {

/// Edge between actor index and CAPEC index (positions in actors()/capecs()).
struct Edge {
  std::uint32_t actor = 0;
  std::uint32_t capec = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Unweighted actor-CAPEC two-mode graph. Nodes exist only through edges, so
/// no node is isolated. Node indices: actors occupy [0, A), CAPECs [A, A+C).
class BimodalGraph {
 public:
  BimodalGraph() = default;

  /// Repeated pairs collapse to one edge.
  static BimodalGraph from_edges(std::vector<std::pair<std::string, CapecId>> edges);

  const std::vector<std::string>& actors() const noexcept { return actors_; }
  const std::vector<CapecId>& capecs() const noexcept { return capecs_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::size_t actor_count() const noexcept { return actors_.size(); }
  std::size_t capec_count() const noexcept { return capecs_.size(); }
  std::size_t node_count() const noexcept { return actors_.size() + capecs_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }

  std::size_t capec_node(std::size_t capec_index) const noexcept { return actors_.size() + capec_index; }
  bool is_actor_node(std::size_t node) const noexcept { return node < actors_.size(); }

  /// Neighbour node indices per node, ascending.
  const std::vector<std::vector<std::uint32_t>>& adjacency() const noexcept { return adjacency_; }
  std::size_t degree(std::size_t node) const { return adjacency_[node].size(); }

  std::optional<std::size_t> find_actor(const std::string& actor_id) const;
  std::optional<std::size_t> find_capec(CapecId id) const;

  /// Human-readable node name: the actor id, or "CAPEC-<id>".
  std::string node_label(std::size_t node) const;

  bool operator==(const BimodalGraph& other) const {
    return actors_ == other.actors_ && capecs_ == other.capecs_ && edges_ == other.edges_;
  }

 private:
  std::vector<std::string> actors_;
  std::vector<CapecId> capecs_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
};

/// CAPEC set of every corpus post (aligned with corpus.posts()): the union of
/// the CAPECs of the CVEs it mentions.
std::vector<std::set<CapecId>> post_capecs(const Corpus& corpus, const CatalogSnapshot& snapshot);

/// Edge (a, p) iff actor a has a post whose CVEs map to p. Actors none of
/// whose CVEs map to a CAPEC do not appear.
BimodalGraph build_graph(const Corpus& corpus, const CatalogSnapshot& snapshot);
BimodalGraph build_graph(const Corpus& corpus, const std::vector<std::set<CapecId>>& capecs_per_post);

/// Degree cap for the popularity filter: an absolute actor count, or a
/// fraction of the graph's actors.
struct PopularityThreshold {
  enum class Mode { kAbsolute, kFraction };
  Mode mode = Mode::kAbsolute;
  double value = 500;

  static PopularityThreshold absolute(std::size_t count);
  static PopularityThreshold fraction(double share);

  /// Largest actor-degree a CAPEC may keep. Throws ValidationError when the
  /// threshold is not positive (absolute < 1, fraction outside (0, 1]).
  double limit(std::size_t actor_count) const;
};

struct RemovalReport {
  double limit = 0;
  std::vector<std::pair<CapecId, std::size_t>> removed_capecs;  // with actor-degree
  std::vector<std::string> removed_actors;

  bool empty() const noexcept { return removed_capecs.empty() && removed_actors.empty(); }
};

struct FilterResult {
  BimodalGraph graph;
  RemovalReport report;
};

/// Removes CAPECs whose actor-degree is strictly above the limit, then the
/// actors this leaves without any edge. One pass of each.
FilterResult filter_popular_capecs(const BimodalGraph& graph, PopularityThreshold threshold = {});

struct ModeDegrees {
  std::size_t count = 0;
  double mean = 0;
  double std = 0;
};

struct DegreeStats {
  ModeDegrees actors;
  ModeDegrees capecs;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  /// |E| / (|actors| * |capecs|)
  double density_bipartite = 0;
  /// 2|E| / (N (N - 1)) over all node pairs.
  double density_all_pairs = 0;
  /// 2|E| / N, both modes combined.
  double mean_degree = 0;
};

/// Standard deviations are sample (n - 1) deviations.
DegreeStats degree_stats(const BimodalGraph& graph);

/// A post of a graph actor restricted to the CAPECs still in the graph.
struct ActorPost {
  std::size_t post = 0;  // index into corpus.posts()
  std::set<CapecId> capecs;
};

/// Per graph actor (by actor index), the posts that keep at least one CAPEC
/// present in the graph, in corpus order.
std::vector<std::vector<ActorPost>> surviving_posts(const Corpus& corpus,
                                                    const std::vector<std::set<CapecId>>& capecs_per_post,
                                                    const BimodalGraph& graph);

/// Actor overview: out-degree, specialized post counts and the one-timer
/// share (actors with exactly one specialized post).
struct ActorOverview {
  Summary out_degree;
  Summary posts;
  double one_timer_share = 0;
  std::size_t one_timers = 0;
  Summary posts_without_one_timers;
};

ActorOverview actor_overview(const BimodalGraph& graph, const std::vector<std::vector<ActorPost>>& posts);

nlohmann::json to_json(const DegreeStats& stats);
nlohmann::json to_json(const RemovalReport& report);
nlohmann::json to_json(const ActorOverview& overview);

}  // namespace coi
