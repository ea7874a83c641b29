#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace coi {

/// Parsed stage summaries the report is assembled from.
struct ReportSources {
  nlohmann::json corpus_stats;
  nlohmann::json graph_stats;
  nlohmann::json communities;
  nlohmann::json sample_stats;
  nlohmann::json clusters;
};

/// One section per overview table: corpus, network (with the removal
/// ledger), communities, skill distribution, sample, clusters. Throws
/// ValidationError when a source lacks an expected field.
nlohmann::json build_report(const ReportSources& sources);

/// Plain-text tables of the same content.
std::string render_report_text(const nlohmann::json& report);

}  // namespace coi
