#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "coi/community.hpp"
#include "coi/error.hpp"
#include "coi/util/stats.hpp"

namespace coi {
namespace {

const std::set<std::string>& stop_words() {
  static const std::set<std::string> words = {
      "the", "and", "for", "via", "with", "from", "into", "using", "use", "through", "that", "this",
      "its", "are", "not", "non", "other", "its", "over", "under", "against", "based", "capec"};
  return words;
}

}  // namespace

std::vector<std::pair<std::string, int>> keyword_digest(std::span<const std::string> names, std::size_t top) {
  std::map<std::string, int> counts;
  for (const auto& name : names) {
    std::set<std::string> tokens;
    std::string token;
    auto flush = [&] {
      if (token.size() >= 3 && !stop_words().count(token)) tokens.insert(token);
      token.clear();
    };
    for (char ch : name) {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      } else {
        flush();
      }
    }
    flush();
    for (const auto& t : tokens) ++counts[t];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > top) ranked.resize(top);
  return ranked;
}

std::vector<CommunityOfInterest> summarize_communities(const BimodalGraph& graph, const Partition& partition,
                                                       const std::vector<std::vector<ActorPost>>& posts,
                                                       const CatalogSnapshot& snapshot, std::size_t top_keywords) {
  if (partition.assignment.size() != graph.node_count()) {
    throw ValidationError("summarize_communities: partition does not match graph");
  }
  const int k = partition.community_count();
  std::vector<CommunityOfInterest> out(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) out[static_cast<std::size_t>(c)].id = c;

  std::vector<std::vector<double>> degrees(out.size()), post_counts(out.size());
  std::vector<std::size_t> one_timers(out.size(), 0);
  for (std::size_t node = 0; node < graph.node_count(); ++node) {
    auto& coi = out[static_cast<std::size_t>(partition.assignment[node])];
    ++coi.nodes;
    if (graph.is_actor_node(node)) {
      coi.actors.push_back(graph.actors()[node]);
      const auto c = static_cast<std::size_t>(partition.assignment[node]);
      degrees[c].push_back(static_cast<double>(graph.degree(node)));
      const auto n_posts = posts.at(node).size();
      post_counts[c].push_back(static_cast<double>(n_posts));
      if (n_posts == 1) ++one_timers[c];
    } else {
      coi.capecs.push_back(graph.capecs()[node - graph.actor_count()]);
    }
  }

  for (std::size_t c = 0; c < out.size(); ++c) {
    auto& coi = out[c];
    if (!coi.actors.empty()) {
      coi.pct_one_timers = 100.0 * static_cast<double>(one_timers[c]) / static_cast<double>(coi.actors.size());
    }
    coi.mean_out_degree = mean_of(degrees[c]);
    coi.std_out_degree = sample_std(degrees[c]);
    coi.mean_posts = mean_of(post_counts[c]);
    coi.std_posts = sample_std(post_counts[c]);
    std::vector<std::string> names;
    for (CapecId id : coi.capecs) {
      if (auto it = snapshot.capecs().find(id); it != snapshot.capecs().end()) names.push_back(it->second.name);
    }
    coi.keywords = keyword_digest(names, top_keywords);
  }
  return out;
}

nlohmann::json to_json(const CommunityOfInterest& c) {
  nlohmann::json keywords = nlohmann::json::array();
  for (const auto& [token, count] : c.keywords) keywords.push_back({{"token", token}, {"count", count}});
  return {{"id", c.id},
          {"nodes", c.nodes},
          {"capec_count", c.capecs.size()},
          {"actor_count", c.actors.size()},
          {"pct_one_timers", c.pct_one_timers},
          {"mean_out_degree", c.mean_out_degree},
          {"std_out_degree", c.std_out_degree},
          {"mean_posts", c.mean_posts},
          {"std_posts", c.std_posts},
          {"keywords", std::move(keywords)},
          {"capecs", c.capecs},
          {"actors", c.actors}};
}

}  // namespace coi
