#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "coi/cve.hpp"

namespace coi {

using CweId = int;
using CapecId = int;

/// Required-skill level of an attack pattern. Codes are fixed: Low=1,
/// Medium=2, High=3.
enum class SkillLevel : int { kLow = 1, kMedium = 2, kHigh = 3 };

constexpr int skill_code(SkillLevel level) noexcept { return static_cast<int>(level); }
std::string_view to_string(SkillLevel level) noexcept;
/// Case-insensitive "low" / "medium" / "high".
std::optional<SkillLevel> parse_skill_level(std::string_view text);

struct CveEntry {
  CveId cve_id;
  std::set<CweId> cwe_ids;
};

struct CapecEntry {
  CapecId id = 0;
  std::string name;
  std::set<CweId> related_cwes;
  std::set<CapecId> parents;
  std::set<CapecId> children;
  std::vector<SkillLevel> skill_scenarios;
};

/// How a CAPEC without any skill scenario borrows one from the hierarchy.
enum class Imputation {
  kParentFirst,  // ancestors, then direct values of children
  kChildFirst,   // direct values of children, then ancestors
  kNone,
};

std::optional<Imputation> parse_imputation(std::string_view text);
std::string_view to_string(Imputation mode) noexcept;

/// Immutable CVE -> CWE -> CAPEC catalog with the CAPEC hierarchy.
class CatalogSnapshot {
 public:
  CatalogSnapshot() = default;

  /// Validates ids and hierarchy. Parent and child links are symmetrised, so
  /// declaring either side is enough. Throws ValidationError on duplicate ids,
  /// links to unknown CAPECs, or a cycle.
  static CatalogSnapshot build(std::vector<CveEntry> cves, std::vector<CapecEntry> capecs);

  const std::map<CveId, CveEntry>& cves() const noexcept { return cves_; }
  const std::map<CapecId, CapecEntry>& capecs() const noexcept { return capecs_; }
  const std::map<CweId, std::set<CapecId>>& cwe_to_capecs() const noexcept { return cwe_to_capecs_; }

  /// Throws LookupError for an unknown id.
  const CapecEntry& capec(CapecId id) const;

  /// Union of the related CAPECs of every CWE the CVE maps to; empty when the
  /// CVE is unknown or has no mapped weakness.
  std::set<CapecId> map_cve_to_capecs(const CveId& cve) const;

  /// Highest direct skill scenario; when there is none, imputed from the
  /// hierarchy per `mode` (ancestors are searched transitively, children only
  /// by their direct values). Absent when nothing applies. Throws LookupError
  /// for an unknown id.
  std::optional<SkillLevel> effective_skill(CapecId id, Imputation mode = Imputation::kParentFirst) const;

  std::size_t cwe_count() const;

 private:
  std::optional<SkillLevel> direct_skill(const CapecEntry& entry) const;
  std::optional<SkillLevel> ancestor_skill(const CapecEntry& entry) const;
  std::optional<SkillLevel> child_skill(const CapecEntry& entry) const;

  std::map<CveId, CveEntry> cves_;
  std::map<CapecId, CapecEntry> capecs_;
  std::map<CweId, std::set<CapecId>> cwe_to_capecs_;
};

inline constexpr const char* kCveCweFile = "cve_cwe.csv";
inline constexpr const char* kCapecFile = "capec.json";

/// Loads `cve_cwe.csv` and `capec.json` from a directory.
CatalogSnapshot load_snapshot(const std::filesystem::path& dir);
CatalogSnapshot load_snapshot(const std::filesystem::path& cve_cwe_csv,
                              const std::filesystem::path& capec_json);

/// Parses "CWE-79" or "79"; nullopt for placeholders such as "NVD-CWE-Other".
std::optional<CweId> parse_cwe_id(std::string_view text);

/// Deterministic normalized renderings of the two catalog files.
std::string render_cve_cwe_csv(const CatalogSnapshot& snapshot);
std::string render_capec_json(const CatalogSnapshot& snapshot);
void write_snapshot(const CatalogSnapshot& snapshot, const std::filesystem::path& dir);

}  // namespace coi
