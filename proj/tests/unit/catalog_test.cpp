#include <random>

#include <gtest/gtest.h>

#include "coi/catalog.hpp"
#include "coi/error.hpp"
#include "coi/util/hash.hpp"
#include "test_support.hpp"

namespace {

using coi::CapecEntry;
using coi::CveEntry;
using coi::Imputation;
using coi::SkillLevel;
using testing_support::fixture;

coi::CveId cve(const char* s) { return *coi::CveId::parse(s); }

coi::CatalogSnapshot fixture_snapshot() { return coi::load_snapshot(fixture("catalog")); }

CapecEntry capec(int id, std::set<int> parents = {}, std::vector<SkillLevel> skills = {}, std::set<int> cwes = {}) {
  CapecEntry e;
  e.id = id;
  e.name = "capec " + std::to_string(id);
  e.parents = std::move(parents);
  e.skill_scenarios = std::move(skills);
  e.related_cwes = std::move(cwes);
  return e;
}

TEST(SkillLevel, FixedCodes) {
  EXPECT_EQ(coi::skill_code(SkillLevel::kLow), 1);
  EXPECT_EQ(coi::skill_code(SkillLevel::kMedium), 2);
  EXPECT_EQ(coi::skill_code(SkillLevel::kHigh), 3);
  EXPECT_LT(SkillLevel::kLow, SkillLevel::kMedium);
  EXPECT_EQ(coi::parse_skill_level("HIGH"), SkillLevel::kHigh);
  EXPECT_FALSE(coi::parse_skill_level("expert"));
}

TEST(Snapshot, FixtureCounts) {
  auto s = fixture_snapshot();
  EXPECT_EQ(s.cves().size(), 5u);
  EXPECT_EQ(s.cwe_count(), 4u);
  EXPECT_EQ(s.capecs().size(), 6u);
}

TEST(Snapshot, EmptyFilesGiveEmptySnapshot) {
  testing_support::TempDir dir;
  coi::write_file_atomic(dir / "cve_cwe.csv", "");
  coi::write_file_atomic(dir / "capec.json", "[]");
  auto s = coi::load_snapshot(dir.path());
  EXPECT_TRUE(s.cves().empty());
  EXPECT_TRUE(s.capecs().empty());
}

TEST(Snapshot, MissingFileIsError) {
  testing_support::TempDir dir;
  EXPECT_THROW(coi::load_snapshot(dir.path()), coi::Error);
}

TEST(Snapshot, SelfParentIsCycle) {
  EXPECT_THROW(coi::CatalogSnapshot::build({}, {capec(1, {1})}), coi::ValidationError);
}

TEST(Snapshot, LongerCycleAndBadLinks) {
  EXPECT_THROW(coi::CatalogSnapshot::build({}, {capec(1, {3}), capec(2, {1}), capec(3, {2})}), coi::ValidationError);
  EXPECT_THROW(coi::CatalogSnapshot::build({}, {capec(1, {99})}), coi::ValidationError);
  EXPECT_THROW(coi::CatalogSnapshot::build({}, {capec(1), capec(1)}), coi::ValidationError);
  EXPECT_THROW(coi::CatalogSnapshot::build({CveEntry{cve("CVE-2020-0001"), {}}, CveEntry{cve("CVE-2020-0001"), {}}}, {}),
               coi::ValidationError);
}

TEST(Snapshot, HierarchyIsSymmetrised) {
  auto s = coi::CatalogSnapshot::build({}, {capec(1), capec(2, {1})});
  EXPECT_EQ(s.capec(1).children, std::set<int>{2});
  EXPECT_THROW(s.capec(3), coi::LookupError);
}

TEST(MapCve, WorkedExample) {
  EXPECT_EQ(fixture_snapshot().map_cve_to_capecs(cve("CVE-2022-45451")), std::set<int>{233});
}

TEST(MapCve, NoCweAndUnknown) {
  auto s = fixture_snapshot();
  EXPECT_TRUE(s.map_cve_to_capecs(cve("CVE-2017-0144")).empty());
  EXPECT_TRUE(s.map_cve_to_capecs(cve("CVE-1999-9999")).empty());
}

TEST(MapCve, UnionOverWeaknesses) {
  EXPECT_EQ(fixture_snapshot().map_cve_to_capecs(cve("CVE-2021-44228")), (std::set<int>{10, 63, 85}));
}

TEST(EffectiveSkill, HighestScenario) {
  EXPECT_EQ(fixture_snapshot().effective_skill(10), SkillLevel::kHigh);
}

TEST(EffectiveSkill, ParentImputation) {
  EXPECT_EQ(fixture_snapshot().effective_skill(85), SkillLevel::kMedium);
}

TEST(EffectiveSkill, ChildImputation) {
  auto s = coi::CatalogSnapshot::build({}, {capec(1), capec(2, {1}, {SkillLevel::kLow}), capec(3, {1}, {SkillLevel::kHigh})});
  EXPECT_EQ(s.effective_skill(1), SkillLevel::kHigh);
  EXPECT_EQ(fixture_snapshot().effective_skill(248), SkillLevel::kMedium);
}

TEST(EffectiveSkill, GrandparentAndPrecedence) {
  // 4 <- 3 <- 2 <- 1: only the grandparent of 3 carries a value.
  auto s = coi::CatalogSnapshot::build(
      {}, {capec(1, {}, {SkillLevel::kLow}), capec(2, {1}), capec(3, {2}), capec(4, {3}, {}), capec(5, {}, {}),
           capec(6, {5}, {SkillLevel::kHigh}), capec(7, {1}), capec(8, {7}, {SkillLevel::kHigh})});
  EXPECT_EQ(s.effective_skill(3), SkillLevel::kLow);
  EXPECT_EQ(s.effective_skill(4), SkillLevel::kLow);
  // 7 has parent-side Low and child-side High.
  EXPECT_EQ(s.effective_skill(7, Imputation::kParentFirst), SkillLevel::kLow);
  EXPECT_EQ(s.effective_skill(7, Imputation::kChildFirst), SkillLevel::kHigh);
  EXPECT_EQ(s.effective_skill(7, Imputation::kNone), std::nullopt);
  EXPECT_EQ(s.effective_skill(5, Imputation::kParentFirst), SkillLevel::kHigh);
  // Children count only by their direct values: 2 has none of its own.
  auto t = coi::CatalogSnapshot::build({}, {capec(1), capec(2, {1}), capec(3, {2}, {SkillLevel::kHigh})});
  EXPECT_EQ(t.effective_skill(1), std::nullopt);
  EXPECT_THROW(t.effective_skill(42), coi::LookupError);
}

TEST(EffectiveSkillProperty, DirectValueNeverOverridden) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> lvl(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CapecEntry> entries;
    for (int id = 1; id <= 12; ++id) {
      std::set<int> parents;
      for (int p = 1; p < id; ++p) {
        if (std::bernoulli_distribution(0.2)(rng)) parents.insert(p);
      }
      std::vector<SkillLevel> skills;
      for (int k = lvl(rng); k > 0; --k) skills.push_back(static_cast<SkillLevel>(1 + lvl(rng) % 3));
      entries.push_back(capec(id, parents, skills));
    }
    auto s = coi::CatalogSnapshot::build({}, entries);
    for (const auto& e : entries) {
      for (auto mode : {Imputation::kParentFirst, Imputation::kChildFirst, Imputation::kNone}) {
        auto v = s.effective_skill(e.id, mode);
        if (!e.skill_scenarios.empty()) {
          EXPECT_EQ(v, *std::max_element(e.skill_scenarios.begin(), e.skill_scenarios.end()));
        }
        EXPECT_EQ(v, s.effective_skill(e.id, mode));
      }
    }
  }
}

TEST(MapCveProperty, AddingLinksNeverShrinks) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CapecEntry> base;
    for (int id = 1; id <= 8; ++id) {
      std::set<int> cwes;
      for (int w = 1; w <= 5; ++w) {
        if (std::bernoulli_distribution(0.3)(rng)) cwes.insert(w);
      }
      base.push_back(capec(id, {}, {}, cwes));
    }
    std::vector<CveEntry> cves;
    for (int i = 1; i <= 6; ++i) {
      std::set<int> cwes;
      for (int w = 1; w <= 5; ++w) {
        if (std::bernoulli_distribution(0.4)(rng)) cwes.insert(w);
      }
      cves.push_back(CveEntry{coi::CveId{2020, static_cast<std::uint64_t>(1000 + i)}, cwes});
    }
    auto before = coi::CatalogSnapshot::build(cves, base);
    auto grown = base;
    grown[static_cast<std::size_t>(trial % 8)].related_cwes.insert(1 + trial % 5);
    auto after = coi::CatalogSnapshot::build(cves, grown);
    for (const auto& c : cves) {
      auto a = before.map_cve_to_capecs(c.cve_id);
      auto b = after.map_cve_to_capecs(c.cve_id);
      EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
      std::set<int> all;
      for (const auto& [cwe, ids] : after.cwe_to_capecs()) all.insert(ids.begin(), ids.end());
      EXPECT_TRUE(std::includes(all.begin(), all.end(), b.begin(), b.end()));
    }
  }
}

TEST(Snapshot, RenderLoadRoundTrip) {
  auto s = fixture_snapshot();
  testing_support::TempDir dir;
  coi::write_snapshot(s, dir.path());
  auto back = coi::load_snapshot(dir.path());
  EXPECT_EQ(coi::render_cve_cwe_csv(back), coi::render_cve_cwe_csv(s));
  EXPECT_EQ(coi::render_capec_json(back), coi::render_capec_json(s));
}

TEST(CweId, Parsing) {
  EXPECT_EQ(coi::parse_cwe_id("CWE-79"), 79);
  EXPECT_EQ(coi::parse_cwe_id("79"), 79);
  EXPECT_FALSE(coi::parse_cwe_id("NVD-CWE-Other"));
  EXPECT_FALSE(coi::parse_cwe_id(""));
}

}  // namespace
