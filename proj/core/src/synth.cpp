#include "coi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "coi/error.hpp"
#include "coi/util/hash.hpp"
#include "coi/util/time.hpp"

namespace coi {
namespace {

using Rng = std::mt19937_64;
using namespace std::chrono;

constexpr int kCveYear = 1900;
constexpr CapecId kFirstCapec = 1000;
constexpr CweId kFirstCwe = 5000;

const char* const kThemes[] = {"Injection",   "Overflow", "Escalation", "Spoofing",    "Traversal",
                               "Hijacking",   "Forgery",  "Sniffing",   "Tampering",   "Deserialization",
                               "Enumeration", "Fuzzing"};
const char* const kVariants[] = {"Parameter", "Header", "Cookie", "Buffer", "Token",  "Session",
                                 "Path",      "Driver", "Kernel", "Script", "Plugin", "Socket"};
const char* const kTemplates[] = {"Anyone have a working PoC for {}?", "Sharing notes on {} and related bugs.",
                                  "{} looks exploitable, thoughts?", "Patched boxes still vulnerable to {}",
                                  "Selling a private exploit for {}"};
const char* const kChatter[] = {"Selling access, PM me.", "Anyone up for a collab?", "Read the new forum rules.",
                                "Escrow available for this thread.", "Vouch for this seller."};

std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); }
double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[uniform_int(rng, 0, items.size() - 1)];
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_int(rng, 0, i - 1)]);
}

struct PendingPost {
  Timestamp ts;
  std::size_t actor;
  std::size_t seq;
  std::string content;
};

std::string render_cve(Rng& rng, std::size_t capec_index) {
  std::string s = CveId{kCveYear, capec_index + 1}.str();
  if (unit(rng) < 0.2) std::transform(s.begin(), s.begin() + 3, s.begin(), [](char c) { return static_cast<char>(c + 32); });
  return s;
}

Quadrant parse_quadrant_name(const std::string& s) {
  for (auto q : {Quadrant::kProfessional, Quadrant::kProAmateur, Quadrant::kAverageCareerCriminal, Quadrant::kAmateur}) {
    if (to_string(q) == s) return q;
  }
  throw ValidationError("unknown archetype '" + s + "'");
}

}  // namespace

std::vector<ArchetypeSpec> default_archetypes() {
  using S = SkillLevel;
  return {
      {Quadrant::kProfessional, 0.25, {S::kHigh}, 0.9, 6, 12, 120, 400},
      {Quadrant::kProAmateur, 0.25, {S::kHigh}, 0.2, 5, 10, 200, 600},
      {Quadrant::kAverageCareerCriminal, 0.25, {S::kLow, S::kMedium}, 0.9, 5, 10, 60, 300},
      {Quadrant::kAmateur, 0.25, {S::kLow}, 0.2, 4, 8, 100, 500},
  };
}

void validate(const SynthConfig& c) {
  if (c.n_communities < 2) throw ValidationError("synth: need at least two communities");
  if (c.capecs_per_community < 3) throw ValidationError("synth: need at least three CAPECs per community");
  if (c.actors_per_community < 1) throw ValidationError("synth: need at least one actor per community");
  if (c.n_communities * c.capecs_per_community > 9000) throw ValidationError("synth: too many CAPECs");
  if (!(c.noise >= 0 && c.noise < 0.5)) throw ValidationError("synth: noise must be in [0, 0.5)");
  if (!(c.skill_focus >= 0 && c.skill_focus <= 1)) throw ValidationError("synth: skill focus must be in [0, 1]");
  if (!(c.chatter >= 0)) throw ValidationError("synth: chatter share must be non-negative");
  if (c.forums < 1) throw ValidationError("synth: need at least one forum");
  if (c.archetypes.empty()) throw ValidationError("synth: no archetypes");
  double total = 0;
  for (const auto& a : c.archetypes) {
    if (!(a.fraction >= 0)) throw ValidationError("synth: negative archetype fraction");
    if (a.skill_pool.empty()) throw ValidationError("synth: empty skill pool");
    if (!(a.commitment >= 0 && a.commitment <= 1)) throw ValidationError("synth: commitment must be in [0, 1]");
    if (a.min_posts < 1 || a.max_posts < a.min_posts) throw ValidationError("synth: bad post range");
    if (a.min_span_days < 0 || a.max_span_days < a.min_span_days) throw ValidationError("synth: bad span range");
    total += a.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("synth: archetype fractions must sum to 1");
}

SynthOutput generate(const SynthConfig& config) {
  validate(config);
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32), 0x5eedU};
  Rng rng(seq);

  const std::size_t nc = config.n_communities;
  const std::size_t cpc = config.capecs_per_community;
  SynthOutput out;

  // CAPECs cycle Low, Medium, High; the last one of each community has no
  // scenario of its own and inherits Medium from the community root.
  std::vector<std::vector<std::vector<std::size_t>>> by_level(nc, std::vector<std::vector<std::size_t>>(4));
  std::vector<CapecId> capec_ids(nc * cpc);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto root_id = static_cast<CapecId>(kFirstCapec + nc * cpc + c);
    CapecEntry root{root_id, fmt::format("{} Attack Family", kThemes[c % std::size(kThemes)]), {}, {}, {}, {SkillLevel::kMedium}};
    for (std::size_t j = 0; j < cpc; ++j) {
      const std::size_t idx = c * cpc + j;
      CapecEntry e;
      e.id = static_cast<CapecId>(kFirstCapec + idx);
      e.name = fmt::format("{} via {} {}", kThemes[c % std::size(kThemes)], kVariants[j % std::size(kVariants)], j);
      e.related_cwes = {static_cast<CweId>(kFirstCwe + idx)};
      e.parents = {root_id};
      auto level = static_cast<SkillLevel>(j % 3 + 1);
      if (cpc >= 4 && j == cpc - 1) {
        level = SkillLevel::kMedium;
      } else {
        e.skill_scenarios = {level};
      }
      by_level[c][static_cast<std::size_t>(skill_code(level))].push_back(idx);
      capec_ids[idx] = e.id;
      out.truth.capec_community[e.id] = static_cast<int>(c);
      out.capecs.push_back(std::move(e));
      out.cves.push_back(CveEntry{CveId{kCveYear, idx + 1}, {static_cast<CweId>(kFirstCwe + idx)}});
    }
    out.capecs.push_back(std::move(root));
  }

  auto community_capecs = [&](std::size_t community) {
    std::vector<std::size_t> all(cpc);
    std::iota(all.begin(), all.end(), community * cpc);
    return all;
  };
  auto pool_of = [&](std::size_t community, const ArchetypeSpec& spec) {
    std::vector<std::size_t> pool;
    for (auto level : spec.skill_pool) {
      const auto& v = by_level[community][static_cast<std::size_t>(skill_code(level))];
      pool.insert(pool.end(), v.begin(), v.end());
    }
    std::sort(pool.begin(), pool.end());
    return pool;
  };

  // Largest-remainder split of each community into archetypes.
  std::vector<std::size_t> per_archetype(config.archetypes.size());
  {
    const auto n = static_cast<double>(config.actors_per_community);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t a = 0; a < config.archetypes.size(); ++a) {
      const double exact = config.archetypes[a].fraction * n;
      per_archetype[a] = static_cast<std::size_t>(std::floor(exact));
      assigned += per_archetype[a];
      remainders.emplace_back(-(exact - std::floor(exact)), a);
    }
    std::sort(remainders.begin(), remainders.end());
    for (std::size_t i = 0; assigned < config.actors_per_community; ++i, ++assigned) {
      ++per_archetype[remainders[i % remainders.size()].second];
    }
  }

  const Timestamp epoch = sys_days{year{2021} / January / 1};
  std::vector<PendingPost> posts;
  std::vector<std::string> actor_ids;
  std::vector<std::pair<Timestamp, Timestamp>> windows;

  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<std::size_t> slots;
    for (std::size_t a = 0; a < per_archetype.size(); ++a) slots.insert(slots.end(), per_archetype[a], a);
    shuffle(rng, slots);
    for (std::size_t slot : slots) {
      const auto& spec = config.archetypes[slot];
      const std::size_t actor = actor_ids.size();
      actor_ids.push_back(fmt::format("u{:04d}", actor));
      out.truth.actor_community[actor_ids.back()] = static_cast<int>(c);
      out.truth.actor_archetype[actor_ids.back()] = spec.archetype;

      const auto home = pool_of(c, spec);
      const auto home_all = community_capecs(c);
      // Mostly from the skill pool, otherwise anywhere in the community.
      auto draw = [&](const std::vector<std::size_t>& pool, const std::vector<std::size_t>& all, std::size_t count) {
        std::vector<std::size_t> picked;
        for (std::size_t attempt = 0; picked.size() < count && attempt < 8 * count; ++attempt) {
          const auto x = unit(rng) < config.skill_focus ? pick(rng, pool) : pick(rng, all);
          if (std::find(picked.begin(), picked.end(), x) == picked.end()) picked.push_back(x);
        }
        return picked;
      };
      std::vector<std::size_t> foreign_communities;
      for (std::size_t f = 0; f < nc; ++f) {
        if (f != c) foreign_communities.push_back(f);
      }
      shuffle(rng, foreign_communities);
      // Off-interest posts all mention one personal foreign CAPEC, so a
      // chatty actor adds a single cross-community edge.
      std::vector<std::size_t> personal_foreign;
      if (const auto candidates = pool_of(foreign_communities.front(), spec); !candidates.empty()) {
        personal_foreign.push_back(pick(rng, candidates));
      }

      const auto n_posts = static_cast<std::size_t>(
          uniform_int(rng, static_cast<std::uint64_t>(spec.min_posts), static_cast<std::uint64_t>(spec.max_posts)));
      const auto span_days = static_cast<long>(uniform_int(rng, static_cast<std::uint64_t>(spec.min_span_days),
                                                           static_cast<std::uint64_t>(spec.max_span_days)));
      const Timestamp first = epoch + days{uniform_int(rng, 0, 364)} + seconds{uniform_int(rng, 0, 86399)};
      const Timestamp last = first + days{span_days};
      windows.emplace_back(first, last);

      const auto n_in = static_cast<std::size_t>(std::lround(spec.commitment * static_cast<double>(n_posts)));
      std::vector<bool> in_interest(n_posts, false);
      std::fill_n(in_interest.begin(), std::min(n_in, n_posts), true);
      shuffle(rng, in_interest);

      for (std::size_t p = 0; p < n_posts; ++p) {
        Timestamp ts = first;
        if (p == n_posts - 1 && n_posts > 1) {
          ts = last;
        } else if (p > 0) {
          ts = first + seconds{uniform_int(rng, 0, static_cast<std::uint64_t>(duration_cast<seconds>(last - first).count()))};
        }
        std::vector<std::size_t> capecs;
        if (unit(rng) < config.noise) {
          const auto f = pick(rng, foreign_communities);
          capecs = draw(pool_of(f, spec), community_capecs(f), uniform_int(rng, 1, 2));
        } else if (in_interest[p] || personal_foreign.empty()) {
          capecs = draw(home, home_all, uniform_int(rng, 3, 4));
        } else {
          capecs = personal_foreign;
        }
        std::string cves;
        for (std::size_t i = 0; i < capecs.size(); ++i) {
          if (i) cves += i + 1 == capecs.size() ? " and " : ", ";
          cves += render_cve(rng, capecs[i]);
        }
        posts.push_back({ts, actor, posts.size(), fmt::format(fmt::runtime(kTemplates[uniform_int(rng, 0, std::size(kTemplates) - 1)]), cves)});
      }
    }
  }

  const auto n_chatter = static_cast<std::size_t>(std::lround(config.chatter * static_cast<double>(posts.size())));
  for (std::size_t i = 0; i < n_chatter; ++i) {
    const auto actor = uniform_int(rng, 0, actor_ids.size() - 1);
    const auto [first, last] = windows[actor];
    const Timestamp ts =
        first + seconds{uniform_int(rng, 0, static_cast<std::uint64_t>(duration_cast<seconds>(last - first).count()))};
    posts.push_back({ts, actor, posts.size(), kChatter[uniform_int(rng, 0, std::size(kChatter) - 1)]});
  }

  std::sort(posts.begin(), posts.end(), [](const PendingPost& a, const PendingPost& b) {
    return std::tie(a.ts, a.actor, a.seq) < std::tie(b.ts, b.actor, b.seq);
  });
  std::ostringstream jsonl;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    nlohmann::json line{{"post_id", fmt::format("p{:06d}", i + 1)},
                        {"actor_id", actor_ids[posts[i].actor]},
                        {"forum_id", fmt::format("forum-{}", uniform_int(rng, 1, config.forums))},
                        {"timestamp", format_timestamp(posts[i].ts)},
                        {"content", posts[i].content}};
    jsonl << line.dump() << '\n';
  }
  out.posts_jsonl = std::move(jsonl).str();
  return out;
}

void write_synth(const SynthOutput& output, const std::filesystem::path& dir) {
  write_file_atomic(dir / kSynthPostsFile, output.posts_jsonl);
  write_snapshot(CatalogSnapshot::build(output.cves, output.capecs), dir / kSynthCatalogDir);
  write_file_atomic(dir / kSynthTruthFile, to_json(output.truth).dump(1) + "\n");
}

nlohmann::json to_json(const GroundTruth& t) {
  nlohmann::json actors = nlohmann::json::array();
  for (const auto& [id, community] : t.actor_community) {
    const auto it = t.actor_archetype.find(id);
    actors.push_back({{"actor_id", id},
                      {"community", community},
                      {"archetype", it == t.actor_archetype.end() ? std::string() : std::string(to_string(it->second))}});
  }
  nlohmann::json capecs = nlohmann::json::array();
  for (const auto& [id, community] : t.capec_community) capecs.push_back({{"capec_id", id}, {"community", community}});
  return {{"actors", std::move(actors)}, {"capecs", std::move(capecs)}};
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  try {
    GroundTruth t;
    for (const auto& a : j.at("actors")) {
      const auto id = a.at("actor_id").get<std::string>();
      t.actor_community[id] = a.at("community").get<int>();
      const auto archetype = a.at("archetype").get<std::string>();
      if (!archetype.empty()) t.actor_archetype[id] = parse_quadrant_name(archetype);
    }
    for (const auto& c : j.at("capecs")) t.capec_community[c.at("capec_id").get<CapecId>()] = c.at("community").get<int>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("truth.json: ") + e.what());
  }
}

nlohmann::json to_json(const SynthConfig& c) {
  nlohmann::json archetypes = nlohmann::json::array();
  for (const auto& a : c.archetypes) {
    nlohmann::json pool = nlohmann::json::array();
    for (auto level : a.skill_pool) pool.push_back(std::string(to_string(level)));
    archetypes.push_back({{"archetype", std::string(to_string(a.archetype))},
                          {"fraction", a.fraction},
                          {"skill_pool", std::move(pool)},
                          {"commitment", a.commitment},
                          {"posts", {a.min_posts, a.max_posts}},
                          {"span_days", {a.min_span_days, a.max_span_days}}});
  }
  return {{"seed", c.seed},
          {"communities", c.n_communities},
          {"capecs_per_community", c.capecs_per_community},
          {"actors_per_community", c.actors_per_community},
          {"noise", c.noise},
          {"skill_focus", c.skill_focus},
          {"chatter", c.chatter},
          {"forums", c.forums},
          {"archetypes", std::move(archetypes)}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  try {
    SynthConfig c;
    c.seed = j.value("seed", c.seed);
    c.n_communities = j.value("communities", c.n_communities);
    c.capecs_per_community = j.value("capecs_per_community", c.capecs_per_community);
    c.actors_per_community = j.value("actors_per_community", c.actors_per_community);
    c.noise = j.value("noise", c.noise);
    c.skill_focus = j.value("skill_focus", c.skill_focus);
    c.chatter = j.value("chatter", c.chatter);
    c.forums = j.value("forums", c.forums);
    if (j.contains("archetypes")) {
      c.archetypes.clear();
      for (const auto& a : j.at("archetypes")) {
        ArchetypeSpec spec;
        spec.archetype = parse_quadrant_name(a.at("archetype").get<std::string>());
        spec.fraction = a.at("fraction").get<double>();
        for (const auto& level : a.at("skill_pool")) {
          auto parsed = parse_skill_level(level.get<std::string>());
          if (!parsed) throw ValidationError("synth config: bad skill level " + level.dump());
          spec.skill_pool.push_back(*parsed);
        }
        spec.commitment = a.at("commitment").get<double>();
        spec.min_posts = a.at("posts").at(0).get<int>();
        spec.max_posts = a.at("posts").at(1).get<int>();
        spec.min_span_days = a.at("span_days").at(0).get<int>();
        spec.max_span_days = a.at("span_days").at(1).get<int>();
        c.archetypes.push_back(std::move(spec));
      }
    }
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
}

std::vector<int> max_weight_matching(const std::vector<std::vector<double>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows ? weight[0].size() : 0;
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  for (const auto& r : weight) {
    if (r.size() != cols) throw ValidationError("max_weight_matching: ragged matrix");
  }
  // Square Hungarian algorithm (potentials form) on costs max - w, padded
  // with zero-weight dummies.
  const std::size_t n = std::max(rows, cols);
  double top = 0;
  for (const auto& r : weight) top = std::max(top, *std::max_element(r.begin(), r.end()));
  auto cost = [&](std::size_t i, std::size_t j) {
    const double w = (i < rows && j < cols) ? weight[i][j] : 0.0;
    return top - w;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] >= 1 && p[j] - 1 < rows && j - 1 < cols) result[p[j] - 1] = static_cast<int>(j - 1);
  }
  return result;
}

double partition_agreement(const std::map<std::string, int>& truth, const std::map<std::string, int>& recovered) {
  if (truth.empty()) return 1.0;
  std::map<int, std::size_t> truth_index, found_index;
  for (const auto& [actor, c] : truth) truth_index.emplace(c, truth_index.size());
  for (const auto& [actor, c] : recovered) {
    if (truth.count(actor)) found_index.emplace(c, found_index.size());
  }
  std::vector<std::vector<double>> overlap(truth_index.size(), std::vector<double>(std::max<std::size_t>(found_index.size(), 1), 0.0));
  for (const auto& [actor, c] : truth) {
    const auto it = recovered.find(actor);
    if (it == recovered.end()) continue;
    overlap[truth_index.at(c)][found_index.at(it->second)] += 1;
  }
  const auto match = max_weight_matching(overlap);
  double hits = 0;
  for (std::size_t r = 0; r < match.size(); ++r) {
    if (match[r] >= 0) hits += overlap[r][static_cast<std::size_t>(match[r])];
  }
  return hits / static_cast<double>(truth.size());
}

}  // namespace coi
