#include "coi/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "coi/catalog_convert.hpp"
#include "coi/error.hpp"
#include "coi/report.hpp"
#include "coi/util/hash.hpp"

namespace coi {
namespace fs = std::filesystem;
namespace {

constexpr const char* kCorpusFile = "corpus.jsonl";
constexpr const char* kCorpusStatsFile = "corpus-stats.json";
constexpr const char* kEdgesFile = "edges.csv";
constexpr const char* kGraphStatsFile = "graph-stats.json";
constexpr const char* kCommunitiesFile = "communities.json";
constexpr const char* kProfilesFile = "profiles.csv";
constexpr const char* kSampleStatsFile = "sample-stats.json";
constexpr const char* kClustersFile = "clusters.json";
constexpr const char* kReportJson = "report.json";
constexpr const char* kReportText = "report.txt";

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json load_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

nlohmann::json threshold_json(const PopularityThreshold& t) {
  return {{"mode", t.mode == PopularityThreshold::Mode::kAbsolute ? "absolute" : "fraction"}, {"value", t.value}};
}

std::vector<std::vector<ActorPost>> graph_posts(const Corpus& corpus, const CatalogSnapshot& snapshot,
                                                const BimodalGraph& graph) {
  return surviving_posts(corpus, post_capecs(corpus, snapshot), graph);
}

}  // namespace

CatalogSnapshot load_catalog_source(const CatalogSource& source, std::vector<std::string>* notes) {
  const bool feeds = !source.nvd_json.empty() || source.capec_csv;
  const bool normalized = source.cve_cwe_csv || source.capec_json;
  if (feeds && normalized) throw ValidationError("catalog: give either official feeds or normalized files, not both");
  if (feeds) {
    if (source.nvd_json.empty() || !source.capec_csv) {
      throw ValidationError("catalog: official conversion needs at least one NVD JSON feed and the CAPEC CSV export");
    }
    ConversionReport report;
    auto snapshot = convert_official_feeds(source.nvd_json, *source.capec_csv, &report);
    if (notes && report.dropped_links > 0) {
      notes->push_back(fmt::format("dropped {} hierarchy links to CAPECs missing from the export", report.dropped_links));
    }
    return snapshot;
  }
  if (!source.cve_cwe_csv || !source.capec_json) {
    throw ValidationError("catalog: normalized input needs both a CVE-CWE CSV and a CAPEC JSON file");
  }
  return load_snapshot(*source.cve_cwe_csv, *source.capec_json);
}

StageResult run_ingest(Workspace& ws, const IngestOptions& options) {
  auto parsed = parse_posts_file(options.input, options.parse);
  const std::size_t valid = parsed.posts.size();
  const std::size_t skipped = parsed.skipped;
  StageResult result{Stage::kIngest, {}, std::move(parsed.warnings)};
  const Corpus corpus = build_corpus(std::move(parsed.posts));

  auto stats = corpus_stats_json(corpus.stats());
  stats["input"] = {{"valid_records", valid}, {"skipped_records", skipped}, {"dropped_without_cve", valid - corpus.stats().posts}};
  const nlohmann::json config{{"input", options.input.filename().string()},
                              {"input_sha256", sha256_file(options.input)},
                              {"not_before", format_timestamp(options.parse.not_before)},
                              {"not_after", format_timestamp(options.parse.not_after)}};
  ws.commit(Stage::kIngest, config, {{kCorpusFile, corpus_to_jsonl(corpus)}, {kCorpusStatsFile, dump(stats)}});
  const auto& s = corpus.stats();
  result.summary = fmt::format("ingest: {} posts by {} actors on {} forums, {} distinct CVEs ({} lines skipped, {} without CVE)",
                               s.posts, s.actors, s.forums, s.distinct_cves, skipped, valid - s.posts);
  return result;
}

StageResult run_catalog(Workspace& ws, const CatalogSource& source) {
  StageResult result{Stage::kCatalog, {}, {}};
  const auto snapshot = load_catalog_source(source, &result.warnings);
  nlohmann::json config = nlohmann::json::object();
  auto record = [&](const char* key, const fs::path& p) {
    config[key].push_back({{"file", p.filename().string()}, {"sha256", sha256_file(p)}});
  };
  for (const auto& p : source.nvd_json) record("nvd_json", p);
  if (source.capec_csv) record("capec_csv", *source.capec_csv);
  if (source.cve_cwe_csv) record("cve_cwe_csv", *source.cve_cwe_csv);
  if (source.capec_json) record("capec_json", *source.capec_json);
  ws.commit(Stage::kCatalog, config,
            {{kCveCweFile, render_cve_cwe_csv(snapshot)}, {kCapecFile, render_capec_json(snapshot)}});
  result.summary = fmt::format("catalog: {} CVEs, {} CWEs, {} CAPECs", snapshot.cves().size(), snapshot.cwe_count(),
                               snapshot.capecs().size());
  return result;
}

StageResult run_graph(Workspace& ws, PopularityThreshold threshold, bool force) {
  ws.require_upstream(Stage::kGraph, force);
  const auto corpus = load_corpus(ws);
  const auto snapshot = load_catalog(ws);
  const auto capecs_per_post = post_capecs(corpus, snapshot);
  const auto full = build_graph(corpus, capecs_per_post);
  const auto filtered = filter_popular_capecs(full, threshold);
  const auto posts = surviving_posts(corpus, capecs_per_post, filtered.graph);

  nlohmann::json threshold_info = threshold_json(threshold);
  threshold_info["limit"] = filtered.report.limit;
  const nlohmann::json stats{{"threshold", threshold_info},
                             {"actors_without_capec", corpus.stats().actors - full.actor_count()},
                             {"unfiltered", to_json(degree_stats(full))},
                             {"filtered", to_json(degree_stats(filtered.graph))},
                             {"removal", to_json(filtered.report)},
                             {"actor_overview", to_json(actor_overview(filtered.graph, posts))}};
  ws.commit(Stage::kGraph, {{"threshold", threshold_json(threshold)}},
            {{kEdgesFile, export_graph(filtered.graph, GraphFormat::kCsv)}, {kGraphStatsFile, dump(stats)}});
  return {Stage::kGraph,
          fmt::format("graph: {} actors, {} CAPECs, {} edges after removing {} CAPECs and {} actors (limit {})",
                      filtered.graph.actor_count(), filtered.graph.capec_count(), filtered.graph.edge_count(),
                      filtered.report.removed_capecs.size(), filtered.report.removed_actors.size(),
                      filtered.report.limit),
          {}};
}

StageResult run_communities(Workspace& ws, const LeidenOptions& options, bool force) {
  ws.require_upstream(Stage::kCommunities, force);
  const auto graph = load_graph(ws);
  const auto partition = leiden(graph, options);

  // Summaries need the per-actor posts, which the graph stage derives the
  // same way from corpus and catalog.
  std::vector<CommunityOfInterest> summary;
  if (ws.has(Stage::kIngest) && ws.has(Stage::kCatalog)) {
    const auto corpus = load_corpus(ws);
    const auto snapshot = load_catalog(ws);
    summary = summarize_communities(graph, partition, graph_posts(corpus, snapshot, graph), snapshot);
  }
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    nodes.push_back({{"node", graph.node_label(v)},
                     {"mode", graph.is_actor_node(v) ? "actor" : "capec"},
                     {"community", partition.assignment[v]}});
  }
  nlohmann::json communities = nlohmann::json::array();
  for (const auto& c : summary) communities.push_back(to_json(c));
  const nlohmann::json config{{"seed", options.seed}, {"restarts", options.restarts}, {"resolution", options.resolution}};
  const nlohmann::json out{{"config", config},
                           {"modularity", partition.quality},
                           {"community_count", partition.community_count()},
                           {"communities", std::move(communities)},
                           {"nodes", std::move(nodes)}};
  ws.commit(Stage::kCommunities, config, {{kCommunitiesFile, dump(out)}});
  return {Stage::kCommunities,
          fmt::format("communities: {} communities, modularity {:.4f}", partition.community_count(), partition.quality),
          {}};
}

StageResult run_expertise(Workspace& ws, const ExpertiseOptions& options, bool force) {
  ws.require_upstream(Stage::kExpertise, force);
  const auto corpus = load_corpus(ws);
  const auto snapshot = load_catalog(ws);
  const auto graph = load_graph(ws);
  const auto partition = load_partition(ws, graph);
  const auto posts = graph_posts(corpus, snapshot, graph);

  auto profiles = build_profiles(corpus, graph, partition, posts, snapshot, options);
  const auto sample = build_sample(profiles, options.min_posts);
  for (auto& p : profiles) p.in_sample = p.n_posts >= options.min_posts && p.skill_score.has_value();

  std::size_t one_timers = 0, without_skill = 0;
  for (const auto& p : profiles) {
    one_timers += p.one_timer ? 1 : 0;
    without_skill += p.skill_score ? 0 : 1;
  }
  const nlohmann::json config{{"min_posts", options.min_posts},
                              {"skill_percentile", options.skill_percentile},
                              {"skill_mode", std::string(to_string(options.skill_mode))},
                              {"imputation", std::string(to_string(options.imputation))}};
  const nlohmann::json stats{{"config", config},
                             {"actors", profiles.size()},
                             {"one_timers", one_timers},
                             {"actors_without_skill", without_skill},
                             {"sample_size", sample.size()},
                             {"sample", to_json(sample_stats(sample))},
                             {"skill_distribution", to_json(skill_distribution(graph, snapshot, profiles, options.imputation))}};
  ws.commit(Stage::kExpertise, config, {{kProfilesFile, render_profiles_csv(profiles)}, {kSampleStatsFile, dump(stats)}});
  return {Stage::kExpertise,
          fmt::format("expertise: {} actor profiles, {} in the sample (>= {} posts with a skill score)", profiles.size(),
                      sample.size(), options.min_posts),
          {}};
}

StageResult run_cluster(Workspace& ws, const ClusterOptions& options, bool force) {
  ws.require_upstream(Stage::kCluster, force);
  std::vector<ActorProfile> sample;
  for (auto& p : load_profiles(ws)) {
    if (p.in_sample) sample.push_back(std::move(p));
  }
  const nlohmann::json config{{"k_min", options.select.k_min},
                              {"k_max", options.select.k_max},
                              {"seed", options.select.kmeans.seed},
                              {"restarts", options.select.kmeans.restarts},
                              {"skill_high", options.rules.skill_high},
                              {"commitment_high", options.rules.commitment_high},
                              {"hyperactive_rate", options.rules.hyperactive_rate},
                              {"active_rate", options.rules.active_rate},
                              {"short_lived_days", options.rules.short_lived_days}};
  nlohmann::json out;
  std::string summary;
  if (sample.size() < 3) {
    out = {{"skipped", true},
           {"reason", fmt::format("sample has {} actors; clustering needs at least 3", sample.size())},
           {"sample_size", sample.size()}};
    summary = fmt::format("cluster: skipped, sample size {}", sample.size());
  } else {
    const auto clustering = cluster_sample(sample, options.select, options.rules);
    out = to_json(clustering);
    out["skipped"] = false;
    out["sample_size"] = sample.size();
    summary = fmt::format("cluster: k = {}, silhouette {:.3f} over {} actors", clustering.k, clustering.silhouette,
                          sample.size());
  }
  out["config"] = config;
  ws.commit(Stage::kCluster, config, {{kClustersFile, dump(out)}});
  return {Stage::kCluster, summary, {}};
}

StageResult run_report(Workspace& ws, bool force) {
  ws.require_upstream(Stage::kReport, force);
  ReportSources sources{load_json(ws.path(Stage::kIngest, kCorpusStatsFile)),
                        load_json(ws.path(Stage::kGraph, kGraphStatsFile)),
                        load_json(ws.path(Stage::kCommunities, kCommunitiesFile)),
                        load_json(ws.path(Stage::kExpertise, kSampleStatsFile)),
                        load_json(ws.path(Stage::kCluster, kClustersFile))};
  const auto report = build_report(sources);
  ws.commit(Stage::kReport, nlohmann::json::object(),
            {{kReportJson, dump(report)}, {kReportText, render_report_text(report)}});
  return {Stage::kReport, "report: wrote " + ws.path(Stage::kReport, kReportJson).string(), {}};
}

StageResult run_synth(Workspace& ws, const SynthConfig& config) {
  const auto output = generate(config);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back(kSynthPostsFile, output.posts_jsonl);
  const auto snapshot = CatalogSnapshot::build(output.cves, output.capecs);
  files.emplace_back(fs::path(kSynthCatalogDir).append(kCveCweFile).generic_string(), render_cve_cwe_csv(snapshot));
  files.emplace_back(fs::path(kSynthCatalogDir).append(kCapecFile).generic_string(), render_capec_json(snapshot));
  files.emplace_back(kSynthTruthFile, to_json(output.truth).dump(1) + "\n");
  ws.commit(Stage::kSynth, to_json(config), files);
  return {Stage::kSynth,
          fmt::format("synth: {} actors in {} communities, {} CAPECs, seed {}", output.truth.actor_community.size(),
                      config.n_communities, output.truth.capec_community.size(), config.seed),
          {}};
}

std::string export_workspace_graph(const Workspace& ws, GraphFormat format, bool force) {
  ws.require_upstream(Stage::kCommunities, force);
  const auto graph = load_graph(ws);
  if (ws.is_current(Stage::kCommunities) || (force && ws.has(Stage::kCommunities))) {
    const auto partition = load_partition(ws, graph);
    return export_graph(graph, format, &partition.assignment);
  }
  return export_graph(graph, format);
}

std::vector<StageResult> run_all(Workspace& ws, const RunAllOptions& options) {
  std::vector<StageResult> results;
  IngestOptions ingest;
  CatalogSource catalog;
  if (options.synth) {
    results.push_back(run_synth(ws, *options.synth));
    ingest.input = ws.path(Stage::kSynth, kSynthPostsFile);
    if (options.ingest) ingest.parse = options.ingest->parse;
    catalog.cve_cwe_csv = ws.dir(Stage::kSynth) / kSynthCatalogDir / kCveCweFile;
    catalog.capec_json = ws.dir(Stage::kSynth) / kSynthCatalogDir / kCapecFile;
  } else {
    if (!options.ingest || !options.catalog) {
      throw ValidationError("run-all needs --input and catalog files, or --synth");
    }
    ingest = *options.ingest;
    catalog = *options.catalog;
  }
  results.push_back(run_ingest(ws, ingest));
  results.push_back(run_catalog(ws, catalog));
  results.push_back(run_graph(ws, options.threshold, options.force));
  results.push_back(run_communities(ws, options.leiden, options.force));
  results.push_back(run_expertise(ws, options.expertise, options.force));
  results.push_back(run_cluster(ws, options.cluster, options.force));
  results.push_back(run_report(ws, options.force));
  return results;
}

Corpus load_corpus(const Workspace& ws) {
  std::ifstream in(ws.path(Stage::kIngest, kCorpusFile), std::ios::binary);
  if (!in) throw_io("cannot open", ws.path(Stage::kIngest, kCorpusFile).string());
  return corpus_from_jsonl(in);
}

CatalogSnapshot load_catalog(const Workspace& ws) { return load_snapshot(ws.dir(Stage::kCatalog)); }

BimodalGraph load_graph(const Workspace& ws) {
  return import_graph(read_file(ws.path(Stage::kGraph, kEdgesFile)), GraphFormat::kCsv).graph;
}

Partition load_partition(const Workspace& ws, const BimodalGraph& graph) {
  const auto path = ws.path(Stage::kCommunities, kCommunitiesFile);
  const auto j = load_json(path);
  try {
    const auto& nodes = j.at("nodes");
    if (nodes.size() != graph.node_count()) {
      throw ValidationError("'" + path.string() + "' does not match the graph's node count");
    }
    Partition p;
    p.assignment.reserve(nodes.size());
    for (std::size_t v = 0; v < nodes.size(); ++v) {
      if (nodes[v].at("node").get<std::string>() != graph.node_label(v)) {
        throw ValidationError("'" + path.string() + "' lists node '" + nodes[v].at("node").get<std::string>() +
                              "' where the graph has '" + graph.node_label(v) + "'");
      }
      p.assignment.push_back(nodes[v].at("community").get<int>());
    }
    p.quality = j.at("modularity").get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "': " + e.what());
  }
}

std::vector<ActorProfile> load_profiles(const Workspace& ws) {
  std::ifstream in(ws.path(Stage::kExpertise, kProfilesFile), std::ios::binary);
  if (!in) throw_io("cannot open", ws.path(Stage::kExpertise, kProfilesFile).string());
  return parse_profiles_csv(in);
}

}  // namespace coi
