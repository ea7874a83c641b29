#include <random>
#include <sstream>
#include <string>

#include <benchmark/benchmark.h>

#include "coi/cluster.hpp"
#include "coi/community.hpp"
#include "coi/cve.hpp"
#include "coi/graph.hpp"
#include "coi/ingest.hpp"
#include "coi/synth.hpp"

namespace {

coi::BimodalGraph synth_graph(std::size_t communities, std::size_t actors_each) {
  coi::SynthConfig config;
  config.n_communities = communities;
  config.actors_per_community = actors_each;
  config.noise = 0.05;
  const auto out = coi::generate(config);
  std::istringstream in(out.posts_jsonl);
  const auto corpus = coi::build_corpus(coi::parse_posts(in).posts);
  return coi::build_graph(corpus, coi::CatalogSnapshot::build(out.cves, out.capecs));
}

void BM_Leiden(benchmark::State& state) {
  const auto graph = synth_graph(static_cast<std::size_t>(state.range(0)), 50);
  for (auto _ : state) benchmark::DoNotOptimize(coi::leiden(graph, {.seed = 1}));
  state.counters["nodes"] = static_cast<double>(graph.node_count());
}
BENCHMARK(BM_Leiden)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  coi::Matrix x(n, coi::kFeatureCount);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < coi::kFeatureCount; ++d) x.at(i, d) = 5.0 * static_cast<double>(i % 4) + noise(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(coi::kmeans(x, 4, {.seed = 1}));
}
BENCHMARK(BM_KMeans)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_ExtractCveIds(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < 200; ++i) {
    text += "patched CVE-2021-" + std::to_string(40000 + i) + " and cve_2020_" + std::to_string(1000 + i) +
            " see https://example.org/x?id=" + std::to_string(i) + "\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(coi::extract_cve_ids(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ExtractCveIds);

}  // namespace

BENCHMARK_MAIN();
