// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "coi/catalog.hpp"
#include "coi/cluster.hpp"
#include "coi/community.hpp"
#include "coi/expertise.hpp"
#include "coi/graph.hpp"
#include "coi/pipeline.hpp"
#include "coi/synth.hpp"
#include "coi/util/hash.hpp"
#include "coi/util/time.hpp"
#include "oracles/cluster_oracle.hpp"
#include "oracles/graph_oracle.hpp"
#include "oracles/misc_oracle.hpp"
#include "test_support.hpp"

namespace {

using testing_support::TempDir;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

coi::Timestamp at(const char* text) { return *coi::parse_timestamp(text); }

Outcome worked_examples() {
  Outcome o;
  const auto a = coi::activity_rate(10, at("2021-03-20T00:00:00Z"), at("2021-12-20T00:00:00Z"));
  o.require(fixed(a.rate, 3) == "0.036", "activity rate " + fixed(a.rate, 6) + " != 0.036");
  o.note("rate " + fixed(a.rate, 3) + " over " + std::to_string(a.days) + " days");

  const auto snap = coi::load_snapshot(testing_support::fixture("catalog"));
  const auto mapped = snap.map_cve_to_capecs(*coi::CveId::parse("CVE-2022-45451"));
  o.require(mapped == std::set<coi::CapecId>{233}, "CVE-2022-45451 does not map to exactly {233}");
  o.note("CVE-2022-45451 -> {233}");

  o.require(coi::skill_code(coi::SkillLevel::kLow) == 1 && coi::skill_code(coi::SkillLevel::kMedium) == 2 &&
                coi::skill_code(coi::SkillLevel::kHigh) == 3,
            "skill codes");
  o.note("Low/Medium/High = 1/2/3");
  return o;
}

Outcome published_labels() {
  Outcome o;
  const auto rows = nlohmann::json::parse(coi::read_file(testing_support::fixture("cluster_overview.json")));
  // Clusters without a stated activity window must label the same whatever it is.
  for (double unstated : {1.0, 30.0, 365.0}) {
    coi::KMeansResult model;
    model.k = rows.size();
    model.centroids = coi::Matrix(rows.size(), coi::kFeatureCount);
    std::vector<coi::ActorProfile> sample;
    for (std::size_t c = 0; c < rows.size(); ++c) {
      const auto centroid = rows[c].at("centroid").get<std::vector<double>>();
      for (std::size_t d = 0; d < coi::kFeatureCount; ++d) model.centroids.at(c, d) = centroid[d];
      const auto& days = rows[c].at("activity_days");
      for (std::size_t m = 0; m < rows[c].at("members").get<std::size_t>(); ++m) {
        coi::ActorProfile p;
        p.activity_days = static_cast<long>(days.is_null() ? unstated : days.get<double>());
        sample.push_back(p);
        model.assignment.push_back(static_cast<int>(c));
      }
    }
    const coi::Scaler identity{{0, 0, 0}, {1, 1, 1}, {false, false, false}};
    const auto labelled = coi::label_clusters(model, identity, sample);
    for (std::size_t c = 0; c < rows.size(); ++c) {
      const std::string got = std::string(coi::to_string(labelled[c].label.quadrant)) + " / " +
                              std::string(coi::to_string(labelled[c].label.activity));
      const std::string want =
          rows[c].at("quadrant").get<std::string>() + " / " + rows[c].at("activity").get<std::string>();
      o.require(got == want, "cluster " + std::to_string(c) + ": " + got + " != " + want);
    }
  }
  o.note("8/8 clusters match");
  return o;
}

Outcome modularity_oracle() {
  Outcome o;
  std::mt19937_64 rng(3001);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing_support::random_bipartite(rng, 8, 0.5);
    std::vector<int> c(g.node_count());
    for (auto& x : c) x = static_cast<int>(rng() % g.node_count());
    worst = std::max(worst, std::abs(coi::modularity(g, c) - oracle::modularity(testing_support::adjacency_of(g), c)));
  }
  o.require(worst <= 1e-12, "max deviation " + std::to_string(worst));
  const auto g = testing_support::two_bicliques();
  o.require(coi::modularity(g, std::vector<int>(g.node_count(), 0)) == 0.0, "all-in-one is not 0");
  std::vector<int> by_component(g.node_count());
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const auto label = g.node_label(n);
    by_component[n] = (label[0] == 'a' || label == "CAPEC-1" || label == "CAPEC-2") ? 0 : 1;
  }
  o.require(coi::modularity(g, by_component) == 0.5, "bicliques by component is not 0.5");
  char buf[96];
  std::snprintf(buf, sizeof buf, "200 graphs, max |dQ| = %.1e; hand cases 0 and 0.5 exact", worst);
  o.note(buf);
  return o;
}

Outcome leiden_quality() {
  Outcome o;
  std::mt19937_64 rng(4001);
  std::vector<coi::BimodalGraph> suite{testing_support::two_bicliques(), coi::BimodalGraph::from_edges({{"a", 1}})};
  for (int i = 0; i < 150; ++i) suite.push_back(testing_support::random_bipartite(rng, 10, 0.2 + 0.1 * (i % 5)));
  double worst_ratio = 1.0;
  for (const auto& g : suite) {
    const auto a = testing_support::adjacency_of(g);
    const coi::LeidenOptions opts{.seed = 17};
    const auto p = coi::leiden(g, opts);
    const double best = oracle::best_modularity(a);
    o.require(p.quality + 1e-12 >= 0.95 * best, "Q " + std::to_string(p.quality) + " < 0.95 x " + std::to_string(best));
    if (best > 1e-12) worst_ratio = std::min(worst_ratio, p.quality / best);
    o.require(oracle::communities_connected(a, p.assignment), "disconnected community");
    o.require(coi::leiden(g, opts) == p && coi::leiden(g, opts) == p, "runs differ");
    if (!o.pass) break;
  }
  o.note(std::to_string(suite.size()) + " graphs, min Q/Q* = " + fixed(worst_ratio, 4) + ", connected, 3 runs identical");
  return o;
}

std::map<std::string, int> recovered(const coi::Workspace& ws) {
  const auto graph = coi::load_graph(ws);
  const auto partition = coi::load_partition(ws, graph);
  std::map<std::string, int> out;
  for (std::size_t n = 0; n < graph.actor_count(); ++n) out[graph.actors()[n]] = partition.assignment[n];
  return out;
}

Outcome planted_recovery() {
  Outcome o;
  double sum = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TempDir tmp;
    coi::Workspace ws(tmp.path());
    coi::RunAllOptions run;
    run.synth = coi::SynthConfig{};
    run.synth->seed = seed;
    run.synth->n_communities = 4;
    run.synth->actors_per_community = 25;
    run.synth->capecs_per_community = 10;
    run.synth->noise = 0.05;
    coi::run_all(ws, run);
    const double agree = coi::partition_agreement(coi::generate(*run.synth).truth.actor_community, recovered(ws));
    sum += agree;
    per_seed += (per_seed.empty() ? "" : " ") + fixed(agree, 2);
  }
  const double mean = sum / 5;
  o.require(mean >= 0.9, "mean agreement " + fixed(mean, 3) + " < 0.9");
  o.note("mean agreement " + fixed(mean, 3) + " (" + per_seed + ")");
  return o;
}

Outcome kmeans_oracles() {
  Outcome o;
  std::mt19937_64 rng(6001);
  double worst_inertia = 0, worst_sil = 0;
  for (int fixture = 0; fixture < 20; ++fixture) {
    const auto x = testing_support::blobs(rng, {{0, 0, 0}, {3, 1, 0}, {0, 4, 2}, {4, 4, 4}}, 6 + fixture % 5, 1.3);
    const std::size_t k = 2 + static_cast<std::size_t>(fixture) % 4;
    const auto m = coi::kmeans(x, k, {.seed = static_cast<std::uint64_t>(fixture)});
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      o.require(m.inertia_history[i] <= m.inertia_history[i - 1], "inertia rose in fixture " + std::to_string(fixture));
    }
    const auto ref = oracle::lloyd(testing_support::rows_of(x), testing_support::rows_of(m.initial_centroids));
    worst_inertia = std::max(worst_inertia, std::abs(m.inertia - ref.inertia));
    if (m.k >= 2) {
      worst_sil = std::max(worst_sil, std::abs(coi::silhouette(x, m.assignment) -
                                               oracle::silhouette(testing_support::rows_of(x), m.assignment)));
    }
  }
  o.require(worst_inertia <= 1e-9, "inertia deviation " + std::to_string(worst_inertia));
  o.require(worst_sil <= 1e-9, "silhouette deviation " + std::to_string(worst_sil));
  std::string ks;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 blob_rng(seed);
    const auto x = testing_support::blobs(blob_rng, {{0, 0, 0}, {10, 0, 0}, {0, 10, 0}}, 20, 1.0);
    const auto r = coi::select_k(x, {.kmeans = {.seed = seed}});
    o.require(r.model.k == 3, "select_k chose " + std::to_string(r.model.k) + " for seed " + std::to_string(seed));
    ks += std::to_string(r.model.k);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "20 fixtures, max |dI| = %.1e, max |ds| = %.1e, select_k = %s", worst_inertia, worst_sil,
                ks.c_str());
  o.note(buf);
  return o;
}

Outcome filter_semantics() {
  Outcome o;
  // CAPEC 1: p0..p498 (499). CAPEC 2: r0..r499 (500). CAPEC 3: p0..p490 and x0..x9 (501).
  std::vector<std::pair<std::string, coi::CapecId>> edges;
  for (int i = 0; i < 499; ++i) edges.emplace_back("p" + std::to_string(i), 1);
  for (int i = 0; i < 500; ++i) edges.emplace_back("r" + std::to_string(i), 2);
  for (int i = 0; i < 491; ++i) edges.emplace_back("p" + std::to_string(i), 3);
  for (int i = 0; i < 10; ++i) edges.emplace_back("x" + std::to_string(i), 3);
  const auto g = coi::BimodalGraph::from_edges(edges);
  for (auto [id, degree] : {std::pair<coi::CapecId, std::size_t>{1, 499}, {2, 500}, {3, 501}}) {
    o.require(g.degree(g.capec_node(*g.find_capec(id))) == degree, "fixture degree of CAPEC " + std::to_string(id));
  }
  const auto f = coi::filter_popular_capecs(g, coi::PopularityThreshold::absolute(500));
  o.require(f.report.removed_capecs == std::vector<std::pair<coi::CapecId, std::size_t>>{{3, 501}},
            "removed CAPECs are not exactly {3}");
  // Actors whose every edge went to a removed CAPEC.
  std::set<std::string> edgeless;
  for (std::size_t a = 0; a < g.actor_count(); ++a) {
    bool kept = false;
    for (auto v : g.adjacency()[a]) kept |= g.capecs()[v - g.actor_count()] != 3;
    if (!kept) edgeless.insert(g.actors()[a]);
  }
  const std::set<std::string> removed(f.report.removed_actors.begin(), f.report.removed_actors.end());
  o.require(removed == edgeless && removed.size() == 10, "pruned actors differ from the edgeless ones");
  o.require(f.graph.actor_count() == 999 && !f.graph.find_capec(3), "filtered graph shape");
  const auto again = coi::filter_popular_capecs(f.graph, coi::PopularityThreshold::absolute(500));
  o.require(again.graph == f.graph && again.report.empty(), "filter not idempotent");
  o.note("removed CAPEC 3 (501) and 10 edgeless actors; idempotent");
  return o;
}

Outcome boundary_rules() {
  Outcome o;
  o.require(coi::post_in_interest({1, 2}, {1}), "exactly half is not in interest");
  o.require(!coi::post_in_interest({1, 2, 3}, {1}), "one third counted in interest");
  std::vector<coi::ActorProfile> profiles(2);
  profiles[0].actor_id = "four";
  profiles[0].n_posts = 4;
  profiles[0].skill_score = 2;
  profiles[1].actor_id = "three";
  profiles[1].n_posts = 3;
  profiles[1].skill_score = 2;
  const auto sample = coi::build_sample(profiles);
  o.require(sample.size() == 1 && sample[0].actor_id == "four", "build_sample boundary");

  std::mt19937_64 rng(8001);
  int checked = 0;
  while (checked < 1000) {
    std::vector<int> v(1 + rng() % 40);
    for (auto& x : v) x = 1 + static_cast<int>(rng() % 3);
    const auto highs = std::count(v.begin(), v.end(), 3);
    if (10 * highs <= 3 * static_cast<long>(v.size())) continue;
    ++checked;
    if (coi::skill_score(v) != 3 || oracle::percentile_code(v, 70) != 3) {
      o.require(false, "list with >30% High did not score 3");
      break;
    }
  }
  o.note("50% -> in interest; 4 kept, 3 dropped; 1000 lists with >30% High score 3");
  return o;
}

Outcome end_to_end_determinism() {
  Outcome o;
  std::vector<std::vector<std::pair<std::string, std::string>>> hashes;
  for (int run = 0; run < 2; ++run) {
    TempDir tmp;
    coi::Workspace ws(tmp.path());
    coi::RunAllOptions options;
    options.synth = coi::SynthConfig{};
    options.leiden.seed = 5;
    options.cluster.select.kmeans.seed = 6;
    coi::run_all(ws, options);
    hashes.push_back(ws.artifact_hashes());
  }
  o.require(!hashes[0].empty() && hashes[0] == hashes[1], "artifact hashes differ between runs");
  o.note(std::to_string(hashes[0].size()) + " artifacts hash-identical");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "worked-example fidelity", 1, worked_examples},
      {2, "published cluster labels", 1, published_labels},
      {3, "modularity oracle", 10, modularity_oracle},
      {4, "Leiden quality and guarantees", 60, leiden_quality},
      {5, "planted-community recovery", 60, planted_recovery},
      {6, "k-means and silhouette oracles", 30, kmeans_oracles},
      {7, "popularity filter semantics", 1, filter_semantics},
      {8, "boundary rules", 10, boundary_rules},
      {9, "end-to-end determinism", 120, end_to_end_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) outcome.require(false, "took " + fixed(secs, 2) + " s, budget " + fixed(c.budget_s, 0) + " s");
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %d %s: %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name, outcome.detail.c_str(), secs);
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
