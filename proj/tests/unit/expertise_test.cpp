#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "coi/error.hpp"
#include "coi/expertise.hpp"
#include "oracles/misc_oracle.hpp"
#include "test_support.hpp"

namespace {

using namespace std::chrono;
using testing_support::fixture;

coi::Timestamp day(int y, unsigned m, unsigned d) { return sys_days{year{y} / m / d}; }

TEST(SkillScore, Examples) {
  EXPECT_EQ(coi::skill_score(std::vector<int>{3}), 3);
  EXPECT_EQ(coi::skill_score(std::vector<int>{1, 1, 2, 2, 3}), 2);
  EXPECT_EQ(coi::skill_score(std::vector<int>{2, 2, 2, 3, 3, 3, 3, 3, 3, 3}), 3);
  EXPECT_EQ(coi::skill_score(std::vector<int>{3, 1, 2, 1, 1}, 50), 1);
  EXPECT_EQ(coi::skill_score(std::vector<int>{1, 2, 3}, 100), 3);
}

TEST(SkillScore, Errors) {
  EXPECT_THROW(coi::skill_score(std::vector<int>{}), coi::ValidationError);
  EXPECT_THROW(coi::skill_score(std::vector<int>{0, 2}), coi::ValidationError);
  EXPECT_THROW(coi::skill_score(std::vector<int>{4}), coi::ValidationError);
  EXPECT_THROW(coi::skill_score(std::vector<int>{2}, 0), coi::ValidationError);
  EXPECT_THROW(coi::skill_score(std::vector<int>{2}, 101), coi::ValidationError);
}

std::vector<int> random_codes(std::mt19937_64& rng, std::size_t max_len = 40) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> code(1, 3);
  std::vector<int> v(len(rng));
  for (auto& x : v) x = code(rng);
  return v;
}

TEST(SkillScoreProperty, MatchesCountingOracle) {
  std::mt19937_64 rng(70);
  std::uniform_real_distribution<double> pct(1, 100);
  for (int i = 0; i < 2000; ++i) {
    const auto v = random_codes(rng);
    const double p = i % 2 ? 70.0 : pct(rng);
    ASSERT_EQ(coi::skill_score(v, p), oracle::percentile_code(v, p));
  }
}

TEST(SkillScoreProperty, HighShareAboveThirtyPercentScoresThree) {
  std::mt19937_64 rng(30);
  for (int i = 0; i < 1000; ++i) {
    const auto v = random_codes(rng);
    const auto highs = static_cast<std::size_t>(std::count(v.begin(), v.end(), 3));
    if (10 * highs > 3 * v.size()) EXPECT_EQ(coi::skill_score(v), 3);
  }
}

TEST(SkillScoreProperty, MonotoneAndInRange) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 1000; ++i) {
    auto v = random_codes(rng);
    const int before = coi::skill_score(v);
    EXPECT_GE(before, 1);
    EXPECT_LE(before, 3);
    auto& x = v[rng() % v.size()];
    x = std::min(3, x + 1);
    EXPECT_GE(coi::skill_score(v), before);
  }
}

TEST(PostInInterest, Boundaries) {
  EXPECT_TRUE(coi::post_in_interest({1, 2}, {1}));
  EXPECT_FALSE(coi::post_in_interest({1, 2, 3}, {1}));
  EXPECT_TRUE(coi::post_in_interest({1, 2}, {1, 2, 3}));
  EXPECT_FALSE(coi::post_in_interest({4}, {1, 2, 3}));
}

TEST(Commitment, Arithmetic) {
  const std::set<int> coi_set{1};
  std::vector<std::set<int>> posts{{1}, {1}, {1, 2}, {3}};
  EXPECT_DOUBLE_EQ(coi::commitment(posts, coi_set), 75.0);
  EXPECT_DOUBLE_EQ(coi::commitment(std::vector<std::set<int>>{{2}, {3}}, coi_set), 0.0);
  std::vector<std::set<int>> six{{1}, {1}, {2}, {3}, {2, 3}, {1, 2, 3}};
  EXPECT_NEAR(coi::commitment(six, coi_set), 100.0 / 3.0, 1e-12);
  EXPECT_THROW(coi::commitment(std::vector<std::set<int>>{}, coi_set), coi::ValidationError);
}

TEST(CommitmentProperty, BoundedAndGrowsWithInInterestPosts) {
  std::mt19937_64 rng(50);
  const std::set<int> coi_set{1, 2};
  for (int i = 0; i < 500; ++i) {
    std::vector<std::set<int>> posts(1 + rng() % 10);
    for (auto& p : posts) {
      p.insert(static_cast<int>(1 + rng() % 5));
      if (rng() % 2) p.insert(static_cast<int>(1 + rng() % 5));
    }
    const double c = coi::commitment(posts, coi_set);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 100.0);
    posts.push_back({1});
    EXPECT_GE(coi::commitment(posts, coi_set), c);
  }
}

TEST(ActivityRate, WorkedExample) {
  auto a = coi::activity_rate(10, day(2021, 3, 20), day(2021, 12, 20));
  EXPECT_EQ(a.days, 275);
  EXPECT_NEAR(a.rate, 0.036, 0.0005);
  EXPECT_DOUBLE_EQ(a.rate, 10.0 / 275.0);
}

TEST(ActivityRate, SameDayAndSinglePost) {
  EXPECT_DOUBLE_EQ(coi::activity_rate(5, day(2021, 1, 1), day(2021, 1, 1) + hours{20}).rate, 5.0);
  auto one = coi::activity_rate(1, day(2021, 1, 1), day(2021, 1, 1));
  EXPECT_EQ(one.days, 1);
  EXPECT_DOUBLE_EQ(one.rate, 1.0);
  EXPECT_THROW(coi::activity_rate(0, day(2021, 1, 1), day(2021, 1, 2)), coi::ValidationError);
  EXPECT_THROW(coi::activity_rate(2, day(2021, 1, 2), day(2021, 1, 1)), coi::ValidationError);
}

TEST(ActivityRateProperty, PositiveAndLinearInPosts) {
  std::mt19937_64 rng(60);
  for (int i = 0; i < 500; ++i) {
    const auto first = day(2020, 1, 1) + seconds{static_cast<long>(rng() % 100000000)};
    const auto last = first + seconds{static_cast<long>(rng() % 50000000)};
    const std::size_t n = 1 + rng() % 50;
    const auto a = coi::activity_rate(n, first, last);
    EXPECT_GT(a.rate, 0);
    EXPECT_GE(a.days, 1);
    EXPECT_NEAR(coi::activity_rate(2 * n, first, last).rate, 2 * a.rate, 1e-12);
  }
}

coi::ActorProfile profile(const std::string& id, std::size_t posts, std::optional<int> skill = 2) {
  coi::ActorProfile p;
  p.actor_id = id;
  p.n_posts = posts;
  p.skill_score = skill;
  return p;
}

TEST(BuildSample, MinimumPostsBoundary) {
  std::vector<coi::ActorProfile> all{profile("three", 3), profile("four", 4), profile("one", 1),
                                     profile("noskill", 9, std::nullopt), profile("ten", 10)};
  auto s = coi::build_sample(all);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].actor_id, "four");
  EXPECT_EQ(s[1].actor_id, "ten");
  for (const auto& p : s) EXPECT_TRUE(p.in_sample);
}

TEST(BuildSampleProperty, OrderStableSubset) {
  std::mt19937_64 rng(80);
  for (int i = 0; i < 200; ++i) {
    std::vector<coi::ActorProfile> all;
    for (int a = 0; a < 20; ++a) all.push_back(profile("a" + std::to_string(a), rng() % 8));
    auto s = coi::build_sample(all, 4);
    std::size_t cursor = 0;
    for (const auto& p : s) {
      while (cursor < all.size() && all[cursor].actor_id != p.actor_id) ++cursor;
      ASSERT_LT(cursor, all.size());
      EXPECT_GE(p.n_posts, 4u);
    }
    EXPECT_EQ(s.size(), static_cast<std::size_t>(std::count_if(all.begin(), all.end(),
                                                               [](const auto& p) { return p.n_posts >= 4; })));
  }
}

struct FixtureWorld {
  coi::Corpus corpus;
  coi::CatalogSnapshot snapshot;
  std::vector<std::set<coi::CapecId>> per_post;
  coi::BimodalGraph graph;
  std::vector<std::vector<coi::ActorPost>> posts;
};

FixtureWorld fixture_world() {
  FixtureWorld w;
  w.corpus = coi::build_corpus(coi::parse_posts_file(fixture("posts.jsonl")).posts);
  w.snapshot = coi::load_snapshot(fixture("catalog"));
  w.per_post = coi::post_capecs(w.corpus, w.snapshot);
  w.graph = coi::build_graph(w.corpus, w.per_post);
  w.posts = coi::surviving_posts(w.corpus, w.per_post, w.graph);
  return w;
}

TEST(Profiles, FixtureByHand) {
  auto w = fixture_world();
  // Community 0: alice plus CAPECs 10, 63, 85. Community 1: everyone else.
  std::vector<int> assign(w.graph.node_count(), 1);
  assign[*w.graph.find_actor("alice")] = 0;
  for (int c : {10, 63, 85}) assign[w.graph.capec_node(*w.graph.find_capec(c))] = 0;
  coi::Partition part{coi::normalize_labels(assign), 0};
  auto profiles = coi::build_profiles(w.corpus, w.graph, part, w.posts, w.snapshot);
  ASSERT_EQ(profiles.size(), 4u);
  const auto& alice = profiles[*w.graph.find_actor("alice")];
  EXPECT_EQ(alice.n_posts, 3u);
  // Posts: {233} out, {10,63,85} in, {66} out.
  EXPECT_EQ(alice.n_in_interest, 1u);
  EXPECT_NEAR(alice.commitment_pct, 100.0 / 3.0, 1e-12);
  // Per occurrence: 233->2, 10->3, 63->2, 85->2, 66->2.
  auto values = alice.skill_values;
  std::sort(values.begin(), values.end());
  EXPECT_EQ(values, (std::vector<int>{2, 2, 2, 2, 3}));
  EXPECT_EQ(alice.skill_score, 2);
  EXPECT_EQ(alice.first_post, day(2021, 3, 20));
  EXPECT_EQ(alice.last_post, day(2021, 12, 20));
  EXPECT_EQ(alice.activity_days, 275);
  EXPECT_FALSE(alice.one_timer);
  const auto& carol = profiles[*w.graph.find_actor("carol")];
  EXPECT_EQ(carol.n_posts, 1u);  // p05 maps to no CAPEC
  EXPECT_TRUE(carol.one_timer);
  EXPECT_EQ(carol.activity_days, 1);
  for (const auto& p : profiles) {
    EXPECT_LE(p.n_in_interest, p.n_posts);
    EXPECT_NEAR(p.commitment_pct, 100.0 * static_cast<double>(p.n_in_interest) / static_cast<double>(p.n_posts), 1e-12);
    EXPECT_EQ(p.one_timer, p.n_posts == 1);
    EXPECT_FALSE(p.in_sample);
  }
}

TEST(Profiles, UniqueCapecMode) {
  auto w = fixture_world();
  coi::Partition part{std::vector<int>(w.graph.node_count(), 0), 0};
  coi::ExpertiseOptions opts;
  opts.skill_mode = coi::SkillListMode::kPerUniqueCapec;
  auto profiles = coi::build_profiles(w.corpus, w.graph, part, w.posts, w.snapshot, opts);
  // bob: 10 (p03) 66 (p04) 233 (p10) -> one value each either way; dave: 10,63,85.
  const auto& bob = profiles[*w.graph.find_actor("bob")];
  EXPECT_EQ(bob.skill_values.size(), 3u);
  EXPECT_DOUBLE_EQ(bob.commitment_pct, 100.0);
}

TEST(Profiles, CsvRoundTrip) {
  auto w = fixture_world();
  coi::Partition part{std::vector<int>(w.graph.node_count(), 0), 0};
  auto profiles = coi::build_profiles(w.corpus, w.graph, part, w.posts, w.snapshot);
  profiles[1].in_sample = true;
  const auto text = coi::render_profiles_csv(profiles);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "actor_id,community_id,skill_score,commitment_pct,n_posts,activity_days,activity_rate,one_timer,"
            "n_in_interest,skill_values,first_post,last_post,in_sample");
  std::istringstream in(text);
  auto back = coi::parse_profiles_csv(in);
  ASSERT_EQ(back.size(), profiles.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].actor_id, profiles[i].actor_id);
    EXPECT_EQ(back[i].skill_values, profiles[i].skill_values);
    EXPECT_EQ(back[i].skill_score, profiles[i].skill_score);
    EXPECT_EQ(back[i].commitment_pct, profiles[i].commitment_pct);
    EXPECT_EQ(back[i].activity_rate, profiles[i].activity_rate);
    EXPECT_EQ(back[i].first_post, profiles[i].first_post);
    EXPECT_EQ(back[i].in_sample, profiles[i].in_sample);
  }
  EXPECT_EQ(coi::render_profiles_csv(back), text);
}

TEST(SampleStats, SummariesAndDistribution) {
  auto w = fixture_world();
  coi::Partition part{std::vector<int>(w.graph.node_count(), 0), 0};
  auto profiles = coi::build_profiles(w.corpus, w.graph, part, w.posts, w.snapshot);
  auto sample = coi::build_sample(profiles, 3);
  ASSERT_EQ(sample.size(), 2u);  // alice and bob
  auto stats = coi::sample_stats(sample);
  EXPECT_EQ(stats.size, 2u);
  EXPECT_DOUBLE_EQ(stats.posts.mean, 3.0);
  auto dist = coi::skill_distribution(w.graph, w.snapshot, profiles, coi::Imputation::kParentFirst);
  ASSERT_EQ(dist.rows.size(), 3u);
  std::size_t total = dist.capecs_without_level;
  double share = 0;
  for (const auto& r : dist.rows) {
    total += r.capecs;
    share += r.value_share;
  }
  EXPECT_EQ(total, w.graph.capec_count());
  EXPECT_NEAR(share, 1.0, 1e-12);
  auto j = coi::to_json(stats);
  EXPECT_TRUE(j.contains("commitment_pct"));
}

}  // namespace
