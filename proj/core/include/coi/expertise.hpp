#pragma once

#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coi/catalog.hpp"
#include "coi/community.hpp"
#include "coi/graph.hpp"
#include "coi/ingest.hpp"
#include "coi/util/stats.hpp"
#include "coi/util/time.hpp"

namespace coi {

/// How an actor's list of skill values is accumulated.
enum class SkillListMode {
  kPerOccurrence,   // one value per (post, CAPEC) pair
  kPerUniqueCapec,  // one value per distinct CAPEC the actor is linked to
};

std::optional<SkillListMode> parse_skill_list_mode(std::string_view text);
std::string_view to_string(SkillListMode mode) noexcept;

struct ExpertiseOptions {
  double skill_percentile = 70;
  SkillListMode skill_mode = SkillListMode::kPerOccurrence;
  Imputation imputation = Imputation::kParentFirst;
  std::size_t min_posts = 4;
};

struct ActorProfile {
  std::string actor_id;
  int community_id = -1;
  std::vector<int> skill_values;
  /// Absent when none of the actor's CAPECs has a skill level.
  std::optional<int> skill_score;
  std::size_t n_posts = 0;
  std::size_t n_in_interest = 0;
  double commitment_pct = 0;
  Timestamp first_post{};
  Timestamp last_post{};
  long activity_days = 1;
  double activity_rate = 0;
  bool one_timer = false;
  bool in_sample = false;
};

/// Nearest-rank percentile of skill codes (each in 1..3): the element at
/// 1-based rank ceil(p/100 * n) of the ascending list. Throws
/// ValidationError for an empty list, a bad code or p outside (0, 100].
int skill_score(std::span<const int> values, double percentile = 70);

/// True iff at least half of the post's CAPECs belong to the community.
bool post_in_interest(const std::set<CapecId>& post_capecs, const std::set<CapecId>& coi_capecs);

/// Percentage of in-interest posts. Throws ValidationError when empty.
double commitment(std::span<const std::set<CapecId>> posts, const std::set<CapecId>& coi_capecs);

struct Activity {
  long days = 1;
  double rate = 0;
};

/// Posts per day over the whole days between first and last post, the span
/// clamped to at least one day. Throws ValidationError for zero posts or
/// last < first.
Activity activity_rate(std::size_t n_posts, Timestamp first_post, Timestamp last_post);

/// One profile per graph actor, in graph actor order. `posts` is the
/// surviving_posts() index for the same graph. `in_sample` is left false.
std::vector<ActorProfile> build_profiles(const Corpus& corpus, const BimodalGraph& graph,
                                         const Partition& partition,
                                         const std::vector<std::vector<ActorPost>>& posts,
                                         const CatalogSnapshot& snapshot, const ExpertiseOptions& options = {});

/// Actors with at least `min_posts` posts and a defined skill score, in
/// input order, with `in_sample` set.
std::vector<ActorProfile> build_sample(std::span<const ActorProfile> profiles, std::size_t min_posts = 4);

struct SampleStats {
  std::size_t size = 0;
  Summary skill_list_length;
  Summary skill_score;
  Summary posts;
  Summary commitment_pct;
  Summary activity_days;
  Summary activity_rate;
};

SampleStats sample_stats(std::span<const ActorProfile> sample);

/// Per skill level: graph CAPECs at that effective level and the share of
/// that code among all actors' skill values.
struct SkillDistribution {
  struct Row {
    SkillLevel level;
    std::size_t capecs = 0;
    double capec_share = 0;
    double value_share = 0;
  };
  std::vector<Row> rows;
  std::size_t capecs_without_level = 0;
};

SkillDistribution skill_distribution(const BimodalGraph& graph, const CatalogSnapshot& snapshot,
                                     std::span<const ActorProfile> profiles, Imputation imputation);

/// `profiles.csv`: actor_id, community_id, skill_score, commitment_pct,
/// n_posts, activity_days, activity_rate, one_timer, followed by
/// n_in_interest, skill_values, first_post, last_post, in_sample.
std::string render_profiles_csv(std::span<const ActorProfile> profiles);
std::vector<ActorProfile> parse_profiles_csv(std::istream& in);

nlohmann::json to_json(const SampleStats& stats);
nlohmann::json to_json(const SkillDistribution& dist);

}  // namespace coi
