// Leiden community detection (local moving, refinement, aggregation) for
// modularity on an undirected graph.

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <numeric>
#include <random>

#include "coi/community.hpp"
#include "coi/error.hpp"

namespace coi {
namespace {

using Rng = std::mt19937_64;

constexpr double kTieEpsilon = 1e-10;

/// Weighted undirected graph used across aggregation levels. Edges are stored
/// in both directions without self-loops; internal weight is kept separately.
struct LevelGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> self_loop;  // internal edge weight, each edge once
  std::vector<double> strength;   // weighted degree including 2 * self_loop
  double total_weight = 0;        // m: every edge counted once

  static LevelGraph from(const BimodalGraph& g) {
    LevelGraph lg;
    lg.n = g.node_count();
    lg.adj.resize(lg.n);
    lg.self_loop.assign(lg.n, 0.0);
    lg.strength.assign(lg.n, 0.0);
    for (std::size_t v = 0; v < lg.n; ++v) {
      for (auto u : g.adjacency()[v]) lg.adj[v].emplace_back(u, 1.0);
      lg.strength[v] = static_cast<double>(g.degree(v));
    }
    lg.total_weight = static_cast<double>(g.edge_count());
    return lg;
  }
};

/// Scratch accumulator of edge weight from one node to each community.
class NeighborWeights {
 public:
  explicit NeighborWeights(std::size_t n) : weight_(n, 0.0), seen_(n, false) {}

  void add(std::size_t community, double w) {
    if (!seen_[community]) {
      seen_[community] = true;
      touched_.push_back(community);
    }
    weight_[community] += w;
  }
  double operator[](std::size_t community) const { return weight_[community]; }
  const std::vector<std::size_t>& touched() const { return touched_; }
  void clear() {
    for (auto c : touched_) {
      weight_[c] = 0.0;
      seen_[c] = false;
    }
    touched_.clear();
  }

 private:
  std::vector<double> weight_;
  std::vector<bool> seen_;
  std::vector<std::size_t> touched_;
};

struct Leiden {
  double resolution;
  double randomness;
  Rng& rng;

  double two_m(const LevelGraph& g) const { return 2.0 * g.total_weight; }

  /// Queue-based local moving. `community` is updated in place; labels stay
  /// within [0, n).
  void move_nodes(const LevelGraph& g, std::vector<std::size_t>& community) const {
    const std::size_t n = g.n;
    std::vector<double> comm_weight(n, 0.0);
    std::vector<std::size_t> comm_size(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      comm_weight[community[v]] += g.strength[v];
      ++comm_size[community[v]];
    }
    std::vector<std::size_t> empty;
    for (std::size_t c = n; c-- > 0;) {
      if (comm_size[c] == 0) empty.push_back(c);
    }
    // `empty` is kept sorted descending so back() is the lowest free label.
    auto release = [&](std::size_t c) {
      empty.insert(std::upper_bound(empty.begin(), empty.end(), c, std::greater<>()), c);
    };
    auto claim = [&](std::size_t c) {
      auto it = std::find(empty.begin(), empty.end(), c);
      if (it != empty.end()) empty.erase(it);
    };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::deque<std::size_t> queue(order.begin(), order.end());
    std::vector<bool> queued(n, true);
    NeighborWeights to(n);
    const double tm = two_m(g);

    // Guard against pathological tie cycling; never reached in practice.
    std::size_t budget = 1000 * (n + 1) + 100000;
    while (!queue.empty() && budget-- > 0) {
      const std::size_t v = queue.front();
      queue.pop_front();
      queued[v] = false;

      const std::size_t old = community[v];
      for (const auto& [u, w] : g.adj[v]) to.add(community[u], w);

      comm_weight[old] -= g.strength[v];
      if (--comm_size[old] == 0) release(old);

      const double kv = g.strength[v];
      auto gain = [&](std::size_t c) { return to[c] - resolution * kv * comm_weight[c] / tm; };

      std::size_t best = old;
      double best_gain = gain(old);
      auto consider = [&](std::size_t c) {
        const double gc = gain(c);
        if (gc > best_gain + kTieEpsilon || (gc >= best_gain - kTieEpsilon && c < best)) {
          best = c;
          best_gain = gc;
        }
      };
      for (auto c : to.touched()) consider(c);
      if (!empty.empty()) consider(empty.back());

      if (comm_size[best] == 0) claim(best);
      comm_weight[best] += kv;
      ++comm_size[best];
      community[v] = best;

      if (best != old) {
        for (const auto& [u, w] : g.adj[v]) {
          if (!queued[u] && community[u] != best) {
            queued[u] = true;
            queue.push_back(u);
          }
        }
      }
      to.clear();
    }
  }

  /// Splits every community of `community` into well-connected
  /// sub-communities by randomized merging of singletons.
  std::vector<std::size_t> refine(const LevelGraph& g, const std::vector<std::size_t>& community) const {
    const std::size_t n = g.n;
    const double tm = two_m(g);
    std::vector<double> comm_total(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) comm_total[community[v]] += g.strength[v];

    std::vector<std::size_t> refined(n);
    std::iota(refined.begin(), refined.end(), 0);
    std::vector<double> ref_weight(g.strength);
    std::vector<std::size_t> ref_size(n, 1);
    // Weight from each refined community to the rest of its parent community.
    std::vector<double> external(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (const auto& [u, w] : g.adj[v]) {
        if (community[u] == community[v]) external[v] += w;
      }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    NeighborWeights to(n);
    std::vector<std::pair<std::size_t, double>> candidates;

    for (std::size_t v : order) {
      if (ref_size[refined[v]] != 1) continue;
      const double kv = g.strength[v];
      const double total = comm_total[community[v]];
      if (external[v] < resolution * kv * (total - kv) / tm) continue;

      for (const auto& [u, w] : g.adj[v]) {
        if (community[u] == community[v]) to.add(refined[u], w);
      }
      candidates.clear();
      candidates.emplace_back(refined[v], 0.0);
      for (auto r : to.touched()) {
        if (r == refined[v]) continue;
        const double kr = ref_weight[r];
        if (external[r] < resolution * kr * (total - kr) / tm) continue;
        const double delta = (to[r] - resolution * kv * kr / tm) / g.total_weight;
        if (delta >= 0) candidates.emplace_back(r, delta);
      }
      std::sort(candidates.begin(), candidates.end());

      std::size_t chosen = refined[v];
      if (candidates.size() > 1) {
        double top = 0.0;
        for (const auto& c : candidates) top = std::max(top, c.second);
        std::vector<double> weights;
        weights.reserve(candidates.size());
        for (const auto& c : candidates) weights.push_back(std::exp((c.second - top) / randomness));
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        chosen = candidates[pick(rng)].first;
      }
      if (chosen != refined[v]) {
        const std::size_t own = refined[v];
        ref_weight[chosen] += kv;
        ref_weight[own] = 0.0;
        ref_size[chosen] += 1;
        ref_size[own] = 0;
        external[chosen] += external[v] - 2.0 * to[chosen];
        refined[v] = chosen;
      }
      to.clear();
    }
    return refined;
  }

  /// Collapses nodes sharing a label into one node. Returns the dense label
  /// map (old node -> new node).
  static LevelGraph aggregate(const LevelGraph& g, const std::vector<std::size_t>& labels,
                              std::vector<std::size_t>& dense) {
    dense.assign(g.n, 0);
    std::vector<std::size_t> remap(g.n, std::numeric_limits<std::size_t>::max());
    std::size_t count = 0;
    for (std::size_t v = 0; v < g.n; ++v) {
      if (remap[labels[v]] == std::numeric_limits<std::size_t>::max()) remap[labels[v]] = count++;
      dense[v] = remap[labels[v]];
    }
    LevelGraph out;
    out.n = count;
    out.adj.resize(count);
    out.self_loop.assign(count, 0.0);
    out.strength.assign(count, 0.0);
    out.total_weight = g.total_weight;
    NeighborWeights to(count);
    std::vector<std::vector<std::size_t>> members(count);
    for (std::size_t v = 0; v < g.n; ++v) members[dense[v]].push_back(v);
    for (std::size_t c = 0; c < count; ++c) {
      for (auto v : members[c]) {
        out.strength[c] += g.strength[v];
        out.self_loop[c] += g.self_loop[v];
        for (const auto& [u, w] : g.adj[v]) {
          if (dense[u] == c) {
            out.self_loop[c] += w / 2.0;  // seen from both endpoints
          } else {
            to.add(dense[u], w);
          }
        }
      }
      std::vector<std::size_t> nbrs(to.touched().begin(), to.touched().end());
      std::sort(nbrs.begin(), nbrs.end());
      for (auto d : nbrs) out.adj[c].emplace_back(static_cast<std::uint32_t>(d), to[d]);
      to.clear();
    }
    return out;
  }

  /// One full Leiden run from `initial` (labels per original node).
  std::vector<std::size_t> run(const LevelGraph& base, std::vector<std::size_t> initial) const {
    LevelGraph level = base;
    std::vector<std::size_t> node_map(base.n);
    std::iota(node_map.begin(), node_map.end(), 0);
    std::vector<std::size_t> community = std::move(initial);

    for (;;) {
      move_nodes(level, community);
      std::vector<std::size_t> dense_comm;
      {
        // Count communities.
        std::vector<bool> used(level.n, false);
        std::size_t k = 0;
        for (auto c : community) {
          if (!used[c]) {
            used[c] = true;
            ++k;
          }
        }
        if (k == level.n) break;
      }
      auto refined = refine(level, community);
      std::vector<std::size_t> ref_dense;
      LevelGraph next = aggregate(level, refined, ref_dense);
      if (next.n == level.n) {
        // Refinement merged nothing; aggregate on the partition itself.
        next = aggregate(level, community, ref_dense);
      }
      std::vector<std::size_t> next_comm(next.n, 0);
      for (std::size_t v = 0; v < level.n; ++v) next_comm[ref_dense[v]] = community[v];
      // Keep labels inside [0, next.n) for the next level's arrays.
      {
        std::vector<std::size_t> relabel(level.n, std::numeric_limits<std::size_t>::max());
        std::size_t k = 0;
        for (auto& c : next_comm) {
          if (relabel[c] == std::numeric_limits<std::size_t>::max()) relabel[c] = k++;
          c = relabel[c];
        }
      }
      for (auto& m : node_map) m = ref_dense[m];
      community = std::move(next_comm);
      level = std::move(next);
    }

    std::vector<std::size_t> flat(base.n);
    for (std::size_t v = 0; v < base.n; ++v) flat[v] = community[node_map[v]];
    return flat;
  }
};

/// Splits any community whose induced subgraph is disconnected into its
/// components; modularity can only increase.
std::vector<int> split_disconnected(const BimodalGraph& g, const std::vector<std::size_t>& labels) {
  const std::size_t n = g.node_count();
  std::vector<int> out(n, -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (out[s] != -1) continue;
    out[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto u : g.adjacency()[v]) {
        if (out[u] == -1 && labels[u] == labels[v]) {
          out[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return out;
}

Partition single_restart(const BimodalGraph& graph, const LevelGraph& base, const LeidenOptions& options,
                         std::uint64_t restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                    static_cast<std::uint32_t>(restart), static_cast<std::uint32_t>(restart >> 32)};
  Rng rng(seq);
  Leiden alg{options.resolution, options.randomness, rng};

  std::vector<std::size_t> labels(base.n);
  std::iota(labels.begin(), labels.end(), 0);
  Partition best;
  best.assignment = normalize_labels(split_disconnected(graph, labels));
  best.quality = modularity(graph, best.assignment, options.resolution);

  for (int pass = 0; pass < options.max_passes; ++pass) {
    labels = alg.run(base, std::move(labels));
    auto assignment = normalize_labels(split_disconnected(graph, labels));
    const double q = modularity(graph, assignment, options.resolution);
    if (!(q > best.quality + 1e-12)) break;
    best.assignment = std::move(assignment);
    best.quality = q;
    labels.assign(best.assignment.begin(), best.assignment.end());
  }
  return best;
}

}  // namespace

Partition leiden(const BimodalGraph& graph, const LeidenOptions& options) {
  if (graph.empty()) throw ValidationError("leiden: graph has no edges");
  if (options.restarts < 1) throw ValidationError("leiden: restarts must be >= 1");
  if (!(options.randomness > 0)) throw ValidationError("leiden: randomness must be > 0");

  const LevelGraph base = LevelGraph::from(graph);
  std::vector<Partition> results(static_cast<std::size_t>(options.restarts));
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    for (int r = 0; r < options.restarts; ++r) {
      results[static_cast<std::size_t>(r)] = single_restart(graph, base, options, static_cast<std::uint64_t>(r));
    }
  } else {
    for (int first = 0; first < options.restarts; first += static_cast<int>(threads)) {
      std::vector<std::future<Partition>> batch;
      const int last = std::min(options.restarts, first + static_cast<int>(threads));
      for (int r = first; r < last; ++r) {
        batch.push_back(std::async(std::launch::async, single_restart, std::cref(graph), std::cref(base),
                                   std::cref(options), static_cast<std::uint64_t>(r)));
      }
      for (int r = first; r < last; ++r) results[static_cast<std::size_t>(r)] = batch[static_cast<std::size_t>(r - first)].get();
    }
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].quality > results[best].quality) best = r;
  }
  return std::move(results[best]);
}

}  // namespace coi
