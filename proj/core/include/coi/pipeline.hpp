#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coi/catalog.hpp"
#include "coi/cluster.hpp"
#include "coi/community.hpp"
#include "coi/expertise.hpp"
#include "coi/graph.hpp"
#include "coi/graph_io.hpp"
#include "coi/ingest.hpp"
#include "coi/synth.hpp"
#include "coi/workspace.hpp"

namespace coi {

/// What a stage did, for the console.
struct StageResult {
  Stage stage;
  std::string summary;
  std::vector<std::string> warnings;
};

struct IngestOptions {
  std::filesystem::path input;
  ParseOptions parse;
};

/// Either official feeds (NVD JSON files plus the MITRE CAPEC CSV) or an
/// already normalized pair of files.
struct CatalogSource {
  std::vector<std::filesystem::path> nvd_json;
  std::optional<std::filesystem::path> capec_csv;
  std::optional<std::filesystem::path> cve_cwe_csv;
  std::optional<std::filesystem::path> capec_json;
};

struct ClusterOptions {
  SelectKOptions select;
  LabelingRules rules;
};

/// Loads or converts a catalog. Throws ValidationError for an incomplete
/// source description.
CatalogSnapshot load_catalog_source(const CatalogSource& source, std::vector<std::string>* notes = nullptr);

StageResult run_ingest(Workspace& ws, const IngestOptions& options);
StageResult run_catalog(Workspace& ws, const CatalogSource& source);
StageResult run_graph(Workspace& ws, PopularityThreshold threshold, bool force = false);
StageResult run_communities(Workspace& ws, const LeidenOptions& options, bool force = false);
StageResult run_expertise(Workspace& ws, const ExpertiseOptions& options, bool force = false);
StageResult run_cluster(Workspace& ws, const ClusterOptions& options, bool force = false);
StageResult run_report(Workspace& ws, bool force = false);
StageResult run_synth(Workspace& ws, const SynthConfig& config);

/// Serializes the workspace graph, with community ids when the communities
/// stage is present and current.
std::string export_workspace_graph(const Workspace& ws, GraphFormat format, bool force = false);

struct RunAllOptions {
  /// When set, generates a synthetic corpus and catalog first and feeds them
  /// to ingest and catalog; otherwise `ingest` and `catalog` must be given.
  std::optional<SynthConfig> synth;
  std::optional<IngestOptions> ingest;
  std::optional<CatalogSource> catalog;
  PopularityThreshold threshold;
  LeidenOptions leiden;
  ExpertiseOptions expertise;
  ClusterOptions cluster;
  bool force = false;
};

std::vector<StageResult> run_all(Workspace& ws, const RunAllOptions& options);

/// Stage artifact loaders shared by downstream stages and tests.
Corpus load_corpus(const Workspace& ws);
CatalogSnapshot load_catalog(const Workspace& ws);
BimodalGraph load_graph(const Workspace& ws);
Partition load_partition(const Workspace& ws, const BimodalGraph& graph);
std::vector<ActorProfile> load_profiles(const Workspace& ws);

}  // namespace coi
