#include "coi/expertise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "coi/error.hpp"
#include "coi/util/csv.hpp"

namespace coi {
namespace {

const csv::Row kProfileHeader = {"actor_id",      "community_id", "skill_score",  "commitment_pct", "n_posts",
                                 "activity_days", "activity_rate", "one_timer",   "n_in_interest",  "skill_values",
                                 "first_post",    "last_post",     "in_sample"};

template <typename T>
T parse_number(const std::string& s, const char* column, std::size_t line) {
  T value{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ValidationError("profiles.csv line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
  }
  return value;
}

bool parse_bool(const std::string& s, const char* column, std::size_t line) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("profiles.csv line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
}

}  // namespace

std::optional<SkillListMode> parse_skill_list_mode(std::string_view text) {
  if (text == "occurrence") return SkillListMode::kPerOccurrence;
  if (text == "unique") return SkillListMode::kPerUniqueCapec;
  return std::nullopt;
}

std::string_view to_string(SkillListMode mode) noexcept {
  return mode == SkillListMode::kPerOccurrence ? "occurrence" : "unique";
}

int skill_score(std::span<const int> values, double percentile) {
  if (values.empty()) throw ValidationError("skill_score: empty skill list");
  if (!(percentile > 0 && percentile <= 100)) throw ValidationError("skill_score: percentile must be in (0, 100]");
  for (int v : values) {
    if (v < 1 || v > 3) throw ValidationError("skill_score: skill code " + std::to_string(v) + " outside 1..3");
  }
  std::vector<int> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Guard the ceiling against representation error (0.7 * 10 = 7.000000000000001).
  const double exact = percentile * static_cast<double>(sorted.size()) / 100.0;
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

bool post_in_interest(const std::set<CapecId>& post_capecs, const std::set<CapecId>& coi_capecs) {
  if (post_capecs.empty()) return false;
  std::size_t shared = 0;
  for (CapecId c : post_capecs) shared += coi_capecs.count(c);
  return 2 * shared >= post_capecs.size();
}

double commitment(std::span<const std::set<CapecId>> posts, const std::set<CapecId>& coi_capecs) {
  if (posts.empty()) throw ValidationError("commitment: actor has no posts with surviving CAPECs");
  std::size_t in_interest = 0;
  for (const auto& p : posts) in_interest += post_in_interest(p, coi_capecs) ? 1 : 0;
  return 100.0 * static_cast<double>(in_interest) / static_cast<double>(posts.size());
}

Activity activity_rate(std::size_t n_posts, Timestamp first_post, Timestamp last_post) {
  if (n_posts == 0) throw ValidationError("activity_rate: no posts");
  if (last_post < first_post) throw ValidationError("activity_rate: last post precedes first post");
  Activity a;
  a.days = std::max(1L, whole_days_between(first_post, last_post));
  a.rate = static_cast<double>(n_posts) / static_cast<double>(a.days);
  return a;
}

std::vector<ActorProfile> build_profiles(const Corpus& corpus, const BimodalGraph& graph,
                                         const Partition& partition,
                                         const std::vector<std::vector<ActorPost>>& posts,
                                         const CatalogSnapshot& snapshot, const ExpertiseOptions& options) {
  if (partition.assignment.size() != graph.node_count() || posts.size() != graph.actor_count()) {
    throw ValidationError("build_profiles: partition or post index does not match graph");
  }
  std::map<CapecId, std::optional<SkillLevel>> skill;
  for (CapecId c : graph.capecs()) skill[c] = snapshot.effective_skill(c, options.imputation);

  std::vector<std::set<CapecId>> coi_capecs(static_cast<std::size_t>(partition.community_count()));
  for (std::size_t c = 0; c < graph.capec_count(); ++c) {
    coi_capecs[static_cast<std::size_t>(partition.assignment[graph.capec_node(c)])].insert(graph.capecs()[c]);
  }

  std::vector<ActorProfile> out;
  out.reserve(graph.actor_count());
  for (std::size_t a = 0; a < graph.actor_count(); ++a) {
    const auto& actor_posts = posts[a];
    if (actor_posts.empty()) {
      throw ValidationError("build_profiles: actor '" + graph.actors()[a] + "' has no surviving posts");
    }
    ActorProfile p;
    p.actor_id = graph.actors()[a];
    p.community_id = partition.assignment[a];
    p.n_posts = actor_posts.size();
    p.one_timer = p.n_posts == 1;

    const auto& coi = coi_capecs[static_cast<std::size_t>(p.community_id)];
    std::vector<std::set<CapecId>> capec_sets;
    capec_sets.reserve(actor_posts.size());
    p.first_post = p.last_post = corpus.posts().at(actor_posts.front().post).record.timestamp;
    for (const auto& ap : actor_posts) {
      capec_sets.push_back(ap.capecs);
      const auto ts = corpus.posts().at(ap.post).record.timestamp;
      p.first_post = std::min(p.first_post, ts);
      p.last_post = std::max(p.last_post, ts);
      if (post_in_interest(ap.capecs, coi)) ++p.n_in_interest;
      if (options.skill_mode == SkillListMode::kPerOccurrence) {
        for (CapecId c : ap.capecs) {
          if (auto level = skill.at(c)) p.skill_values.push_back(skill_code(*level));
        }
      }
    }
    if (options.skill_mode == SkillListMode::kPerUniqueCapec) {
      for (auto node : graph.adjacency()[a]) {
        if (auto level = skill.at(graph.capecs()[node - graph.actor_count()])) p.skill_values.push_back(skill_code(*level));
      }
    }
    p.commitment_pct = commitment(capec_sets, coi);
    if (!p.skill_values.empty()) p.skill_score = skill_score(p.skill_values, options.skill_percentile);
    const auto act = activity_rate(p.n_posts, p.first_post, p.last_post);
    p.activity_days = act.days;
    p.activity_rate = act.rate;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ActorProfile> build_sample(std::span<const ActorProfile> profiles, std::size_t min_posts) {
  std::vector<ActorProfile> sample;
  for (const auto& p : profiles) {
    if (p.n_posts >= min_posts && p.skill_score) {
      sample.push_back(p);
      sample.back().in_sample = true;
    }
  }
  return sample;
}

SampleStats sample_stats(std::span<const ActorProfile> sample) {
  std::vector<double> len, score, posts, commit, days, rate;
  for (const auto& p : sample) {
    len.push_back(static_cast<double>(p.skill_values.size()));
    score.push_back(p.skill_score.value_or(0));
    posts.push_back(static_cast<double>(p.n_posts));
    commit.push_back(p.commitment_pct);
    days.push_back(static_cast<double>(p.activity_days));
    rate.push_back(p.activity_rate);
  }
  return SampleStats{sample.size(), describe(len),    describe(score), describe(posts),
                     describe(commit), describe(days), describe(rate)};
}

SkillDistribution skill_distribution(const BimodalGraph& graph, const CatalogSnapshot& snapshot,
                                     std::span<const ActorProfile> profiles, Imputation imputation) {
  SkillDistribution dist;
  std::map<int, std::size_t> capecs, values;
  for (CapecId c : graph.capecs()) {
    if (auto level = snapshot.effective_skill(c, imputation)) {
      ++capecs[skill_code(*level)];
    } else {
      ++dist.capecs_without_level;
    }
  }
  std::size_t total_values = 0;
  for (const auto& p : profiles) {
    for (int v : p.skill_values) ++values[v];
    total_values += p.skill_values.size();
  }
  const std::size_t rated = graph.capec_count() - dist.capecs_without_level;
  for (auto level : {SkillLevel::kLow, SkillLevel::kMedium, SkillLevel::kHigh}) {
    SkillDistribution::Row row{level, capecs[skill_code(level)], 0, 0};
    if (rated > 0) row.capec_share = static_cast<double>(row.capecs) / static_cast<double>(rated);
    if (total_values > 0) row.value_share = static_cast<double>(values[skill_code(level)]) / static_cast<double>(total_values);
    dist.rows.push_back(row);
  }
  return dist;
}

std::string render_profiles_csv(std::span<const ActorProfile> profiles) {
  std::ostringstream out;
  csv::write_row(out, kProfileHeader);
  for (const auto& p : profiles) {
    std::string values;
    for (int v : p.skill_values) {
      if (!values.empty()) values.push_back(' ');
      values += std::to_string(v);
    }
    csv::write_row(out, {p.actor_id, std::to_string(p.community_id),
                         p.skill_score ? std::to_string(*p.skill_score) : std::string(),
                         fmt::format("{}", p.commitment_pct), std::to_string(p.n_posts),
                         std::to_string(p.activity_days), fmt::format("{}", p.activity_rate),
                         p.one_timer ? "true" : "false", std::to_string(p.n_in_interest), values,
                         format_timestamp(p.first_post), format_timestamp(p.last_post),
                         p.in_sample ? "true" : "false"});
  }
  return std::move(out).str();
}

std::vector<ActorProfile> parse_profiles_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || *header != kProfileHeader) throw ValidationError("profiles.csv: unexpected header");
  std::vector<ActorProfile> out;
  while (auto row = reader.next()) {
    if (row->size() == 1 && (*row)[0].empty()) continue;
    const auto line = reader.line();
    if (row->size() != kProfileHeader.size()) {
      throw ValidationError("profiles.csv line " + std::to_string(line) + ": wrong column count");
    }
    const auto& r = *row;
    ActorProfile p;
    p.actor_id = r[0];
    p.community_id = parse_number<int>(r[1], "community_id", line);
    if (!r[2].empty()) p.skill_score = parse_number<int>(r[2], "skill_score", line);
    p.commitment_pct = parse_number<double>(r[3], "commitment_pct", line);
    p.n_posts = parse_number<std::size_t>(r[4], "n_posts", line);
    p.activity_days = parse_number<long>(r[5], "activity_days", line);
    p.activity_rate = parse_number<double>(r[6], "activity_rate", line);
    p.one_timer = parse_bool(r[7], "one_timer", line);
    p.n_in_interest = parse_number<std::size_t>(r[8], "n_in_interest", line);
    std::istringstream values(r[9]);
    for (int v; values >> v;) p.skill_values.push_back(v);
    auto first = parse_timestamp(r[10]);
    auto last = parse_timestamp(r[11]);
    if (!first || !last) throw ValidationError("profiles.csv line " + std::to_string(line) + ": bad timestamp");
    p.first_post = *first;
    p.last_post = *last;
    p.in_sample = parse_bool(r[12], "in_sample", line);
    out.push_back(std::move(p));
  }
  return out;
}

nlohmann::json to_json(const SampleStats& s) {
  return {{"size", s.size},
          {"skill_list_length", s.skill_list_length},
          {"skill_score", s.skill_score},
          {"posts", s.posts},
          {"commitment_pct", s.commitment_pct},
          {"activity_days", s.activity_days},
          {"activity_rate", s.activity_rate}};
}

nlohmann::json to_json(const SkillDistribution& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : d.rows) {
    rows.push_back({{"level", std::string(to_string(r.level))},
                    {"code", skill_code(r.level)},
                    {"capecs", r.capecs},
                    {"capec_share", r.capec_share},
                    {"value_share", r.value_share}});
  }
  return {{"levels", std::move(rows)}, {"capecs_without_level", d.capecs_without_level}};
}

}  // namespace coi
