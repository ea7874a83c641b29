#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coi/catalog.hpp"
#include "coi/cluster.hpp"

namespace coi {

/// Posting behaviour planted for one expertise archetype.
struct ArchetypeSpec {
  Quadrant archetype = Quadrant::kAmateur;
  double fraction = 0.25;
  /// Skill levels of the CAPECs this archetype talks about.
  std::vector<SkillLevel> skill_pool;
  /// Share of posts that stay within the home community, in [0, 1].
  double commitment = 0.5;
  int min_posts = 4;
  int max_posts = 8;
  int min_span_days = 30;
  int max_span_days = 365;
};

std::vector<ArchetypeSpec> default_archetypes();

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_communities = 4;
  std::size_t capecs_per_community = 10;
  std::size_t actors_per_community = 25;
  /// Probability that a post is drawn entirely from another community.
  double noise = 0.05;
  /// Probability that a CAPEC draw is limited to the archetype's skill pool
  /// rather than the whole community.
  double skill_focus = 0.5;
  /// Posts without any CVE, as a share of CVE posts.
  double chatter = 0.1;
  std::size_t forums = 6;
  std::vector<ArchetypeSpec> archetypes = default_archetypes();
};

/// Throws ValidationError: fewer than two communities, fewer than three
/// CAPECs per community, noise outside [0, 0.5), fractions not summing to 1,
/// empty skill pools or bad post/span ranges.
void validate(const SynthConfig& config);

struct GroundTruth {
  std::map<std::string, int> actor_community;
  std::map<std::string, Quadrant> actor_archetype;
  std::map<CapecId, int> capec_community;
};

struct SynthOutput {
  std::string posts_jsonl;
  std::vector<CveEntry> cves;
  std::vector<CapecEntry> capecs;
  GroundTruth truth;
};

/// Deterministic in the config: the same seed gives byte-identical output.
/// Synthetic CVEs use the reserved year 1900.
SynthOutput generate(const SynthConfig& config);

inline constexpr const char* kSynthPostsFile = "posts.jsonl";
inline constexpr const char* kSynthCatalogDir = "catalog";
inline constexpr const char* kSynthTruthFile = "truth.json";

/// posts.jsonl, catalog/{cve_cwe.csv,capec.json}, truth.json
void write_synth(const SynthOutput& output, const std::filesystem::path& dir);

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Fraction of truth actors whose recovered community is matched to their
/// planted one under the one-to-one community matching that maximizes total
/// overlap. Actors absent from `recovered` count as misses.
double partition_agreement(const std::map<std::string, int>& truth, const std::map<std::string, int>& recovered);

/// Maximum-weight one-to-one assignment of rows to columns; result[row] is
/// the column or -1. Rectangular matrices are allowed.
std::vector<int> max_weight_matching(const std::vector<std::vector<double>>& weight);

}  // namespace coi
