#include "coi/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "coi/error.hpp"

namespace coi {

using nlohmann::json;

BimodalGraph BimodalGraph::from_edges(std::vector<std::pair<std::string, CapecId>> edges) {
  BimodalGraph g;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  for (const auto& [actor, capec] : edges) {
    if (g.actors_.empty() || g.actors_.back() != actor) g.actors_.push_back(actor);
    g.capecs_.push_back(capec);
  }
  std::sort(g.capecs_.begin(), g.capecs_.end());
  g.capecs_.erase(std::unique(g.capecs_.begin(), g.capecs_.end()), g.capecs_.end());

  g.edges_.reserve(edges.size());
  std::uint32_t actor_index = 0;
  for (const auto& [actor, capec] : edges) {
    while (g.actors_[actor_index] != actor) ++actor_index;
    const auto capec_index = static_cast<std::uint32_t>(
        std::lower_bound(g.capecs_.begin(), g.capecs_.end(), capec) - g.capecs_.begin());
    g.edges_.push_back(Edge{actor_index, capec_index});
  }

  g.adjacency_.assign(g.node_count(), {});
  for (const auto& e : g.edges_) {
    const auto cnode = static_cast<std::uint32_t>(g.capec_node(e.capec));
    g.adjacency_[e.actor].push_back(cnode);
    g.adjacency_[cnode].push_back(e.actor);
  }
  for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

std::optional<std::size_t> BimodalGraph::find_actor(const std::string& actor_id) const {
  auto it = std::lower_bound(actors_.begin(), actors_.end(), actor_id);
  if (it == actors_.end() || *it != actor_id) return std::nullopt;
  return static_cast<std::size_t>(it - actors_.begin());
}

std::optional<std::size_t> BimodalGraph::find_capec(CapecId id) const {
  auto it = std::lower_bound(capecs_.begin(), capecs_.end(), id);
  if (it == capecs_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - capecs_.begin());
}

std::string BimodalGraph::node_label(std::size_t node) const {
  if (is_actor_node(node)) return actors_[node];
  return "CAPEC-" + std::to_string(capecs_[node - actors_.size()]);
}

std::vector<std::set<CapecId>> post_capecs(const Corpus& corpus, const CatalogSnapshot& snapshot) {
  std::vector<std::set<CapecId>> out;
  out.reserve(corpus.posts().size());
  for (const auto& post : corpus.posts()) {
    std::set<CapecId> capecs;
    for (const auto& cve : post.mentions) {
      auto mapped = snapshot.map_cve_to_capecs(cve);
      capecs.insert(mapped.begin(), mapped.end());
    }
    out.push_back(std::move(capecs));
  }
  return out;
}

BimodalGraph build_graph(const Corpus& corpus, const CatalogSnapshot& snapshot) {
  return build_graph(corpus, post_capecs(corpus, snapshot));
}

BimodalGraph build_graph(const Corpus& corpus, const std::vector<std::set<CapecId>>& capecs_per_post) {
  std::vector<std::pair<std::string, CapecId>> edges;
  const auto& posts = corpus.posts();
  for (std::size_t i = 0; i < posts.size(); ++i) {
    for (CapecId c : capecs_per_post.at(i)) edges.emplace_back(posts[i].record.actor_id, c);
  }
  return BimodalGraph::from_edges(std::move(edges));
}

PopularityThreshold PopularityThreshold::absolute(std::size_t count) {
  return {Mode::kAbsolute, static_cast<double>(count)};
}

PopularityThreshold PopularityThreshold::fraction(double share) { return {Mode::kFraction, share}; }

double PopularityThreshold::limit(std::size_t actor_count) const {
  if (mode == Mode::kAbsolute) {
    if (!(value >= 1)) throw ValidationError("popularity threshold must be >= 1");
    return std::floor(value);
  }
  if (!(value > 0 && value <= 1)) throw ValidationError("popularity fraction must be in (0, 1]");
  return value * static_cast<double>(actor_count);
}

FilterResult filter_popular_capecs(const BimodalGraph& graph, PopularityThreshold threshold) {
  FilterResult result;
  result.report.limit = threshold.limit(graph.actor_count());

  std::vector<bool> drop_capec(graph.capec_count(), false);
  for (std::size_t c = 0; c < graph.capec_count(); ++c) {
    const auto degree = graph.degree(graph.capec_node(c));
    if (static_cast<double>(degree) > result.report.limit) {
      drop_capec[c] = true;
      result.report.removed_capecs.emplace_back(graph.capecs()[c], degree);
    }
  }
  if (result.report.removed_capecs.empty()) {
    result.graph = graph;
    return result;
  }

  std::vector<std::pair<std::string, CapecId>> kept;
  std::vector<bool> actor_kept(graph.actor_count(), false);
  for (const auto& e : graph.edges()) {
    if (drop_capec[e.capec]) continue;
    kept.emplace_back(graph.actors()[e.actor], graph.capecs()[e.capec]);
    actor_kept[e.actor] = true;
  }
  for (std::size_t a = 0; a < graph.actor_count(); ++a) {
    if (!actor_kept[a]) result.report.removed_actors.push_back(graph.actors()[a]);
  }
  result.graph = BimodalGraph::from_edges(std::move(kept));
  return result;
}

namespace {

ModeDegrees mode_degrees(const BimodalGraph& g, std::size_t first, std::size_t count) {
  std::vector<double> degrees;
  degrees.reserve(count);
  for (std::size_t n = first; n < first + count; ++n) degrees.push_back(static_cast<double>(g.degree(n)));
  return ModeDegrees{count, mean_of(degrees), sample_std(degrees)};
}

}  // namespace

DegreeStats degree_stats(const BimodalGraph& graph) {
  DegreeStats s;
  s.actors = mode_degrees(graph, 0, graph.actor_count());
  s.capecs = mode_degrees(graph, graph.actor_count(), graph.capec_count());
  s.nodes = graph.node_count();
  s.edges = graph.edge_count();
  const double e = static_cast<double>(s.edges);
  const double n = static_cast<double>(s.nodes);
  if (s.actors.count > 0 && s.capecs.count > 0) {
    s.density_bipartite = e / (static_cast<double>(s.actors.count) * static_cast<double>(s.capecs.count));
  }
  if (s.nodes > 1) s.density_all_pairs = 2.0 * e / (n * (n - 1.0));
  if (s.nodes > 0) s.mean_degree = 2.0 * e / n;
  return s;
}

std::vector<std::vector<ActorPost>> surviving_posts(const Corpus& corpus,
                                                    const std::vector<std::set<CapecId>>& capecs_per_post,
                                                    const BimodalGraph& graph) {
  std::vector<std::vector<ActorPost>> out(graph.actor_count());
  for (std::size_t a = 0; a < graph.actor_count(); ++a) {
    auto it = corpus.actor_index().find(graph.actors()[a]);
    if (it == corpus.actor_index().end()) continue;
    for (std::size_t post : it->second) {
      ActorPost ap{post, {}};
      for (CapecId c : capecs_per_post.at(post)) {
        if (graph.find_capec(c)) ap.capecs.insert(c);
      }
      if (!ap.capecs.empty()) out[a].push_back(std::move(ap));
    }
  }
  return out;
}

ActorOverview actor_overview(const BimodalGraph& graph, const std::vector<std::vector<ActorPost>>& posts) {
  std::vector<double> degree, counts, multi;
  ActorOverview o;
  for (std::size_t a = 0; a < graph.actor_count(); ++a) {
    degree.push_back(static_cast<double>(graph.degree(a)));
    const auto n = static_cast<double>(posts.at(a).size());
    counts.push_back(n);
    if (posts[a].size() == 1) {
      ++o.one_timers;
    } else {
      multi.push_back(n);
    }
  }
  o.out_degree = describe(degree);
  o.posts = describe(counts);
  o.posts_without_one_timers = describe(multi);
  if (graph.actor_count() > 0) {
    o.one_timer_share = static_cast<double>(o.one_timers) / static_cast<double>(graph.actor_count());
  }
  return o;
}

json to_json(const DegreeStats& s) {
  auto mode = [](const ModeDegrees& m) { return json{{"count", m.count}, {"mean_degree", m.mean}, {"std_degree", m.std}}; };
  return json{{"actors", mode(s.actors)},
              {"capecs", mode(s.capecs)},
              {"nodes", s.nodes},
              {"edges", s.edges},
              {"density_bipartite", s.density_bipartite},
              {"density_all_pairs", s.density_all_pairs},
              {"mean_degree", s.mean_degree}};
}

json to_json(const RemovalReport& r) {
  json capecs = json::array();
  for (const auto& [id, degree] : r.removed_capecs) capecs.push_back(json{{"capec", id}, {"actor_degree", degree}});
  return json{{"limit", r.limit},
              {"removed_capec_count", r.removed_capecs.size()},
              {"removed_actor_count", r.removed_actors.size()},
              {"removed_capecs", std::move(capecs)},
              {"removed_actors", r.removed_actors}};
}

json to_json(const ActorOverview& o) {
  return json{{"out_degree", o.out_degree},
              {"posts", o.posts},
              {"one_timers", o.one_timers},
              {"one_timer_share", o.one_timer_share},
              {"posts_without_one_timers", o.posts_without_one_timers}};
}

}  // namespace coi
