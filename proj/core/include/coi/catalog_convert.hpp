#pragma once

#include <filesystem>
#include <istream>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coi/catalog.hpp"

namespace coi {

/// Weakness links from an NVD JSON feed. Both the 2.0 API layout
/// (`vulnerabilities[].cve.weaknesses`) and the legacy 1.1 layout
/// (`CVE_Items[].cve.problemtype`) are understood. Placeholder weaknesses
/// ("NVD-CWE-Other", "NVD-CWE-noinfo") are dropped, leaving the CVE unmapped.
std::vector<CveEntry> cve_entries_from_nvd(const nlohmann::json& feed);

struct CapecConversion {
  std::vector<CapecEntry> entries;
  /// Hierarchy links to CAPEC ids absent from the export (deprecated entries).
  std::size_t dropped_links = 0;
};

/// MITRE's CAPEC CSV export ("Comprehensive CAPEC Dictionary"). Uses the ID,
/// Name, Related Attack Patterns (ChildOf / ParentOf), Skills Required and
/// Related Weaknesses columns.
CapecConversion capec_entries_from_mitre_csv(std::istream& in);

struct ConversionReport {
  std::size_t cves = 0;
  std::size_t capecs = 0;
  std::size_t dropped_links = 0;
};

/// Merges any number of NVD feeds with one CAPEC export into a validated
/// snapshot.
CatalogSnapshot convert_official_feeds(const std::vector<std::filesystem::path>& nvd_feeds,
                                       const std::filesystem::path& capec_csv,
                                       ConversionReport* report = nullptr);

}  // namespace coi
