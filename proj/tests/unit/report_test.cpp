#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "coi/error.hpp"
#include "coi/pipeline.hpp"
#include "coi/report.hpp"
#include "coi/util/hash.hpp"
#include "test_support.hpp"

namespace {

using coi::Stage;

nlohmann::json read_json(const std::filesystem::path& p) { return nlohmann::json::parse(coi::read_file(p)); }

/// Sources from one synthetic run, shared by the tests below.
const coi::ReportSources& sources() {
  static const coi::ReportSources s = [] {
    testing_support::TempDir tmp;
    coi::Workspace ws(tmp.path());
    coi::RunAllOptions o;
    o.synth = coi::SynthConfig{};
    coi::run_all(ws, o);
    return coi::ReportSources{read_json(ws.path(Stage::kIngest, "corpus-stats.json")),
                              read_json(ws.path(Stage::kGraph, "graph-stats.json")),
                              read_json(ws.path(Stage::kCommunities, "communities.json")),
                              read_json(ws.path(Stage::kExpertise, "sample-stats.json")),
                              read_json(ws.path(Stage::kCluster, "clusters.json"))};
  }();
  return s;
}

TEST(Report, SectionsAndRows) {
  const auto r = coi::build_report(sources());
  EXPECT_EQ(r.at("corpus"), sources().corpus_stats);
  EXPECT_EQ(r.at("communities").at("rows").size(), sources().communities.at("communities").size());
  EXPECT_EQ(r.at("communities").at("count"), sources().communities.at("community_count"));
  const auto& removal = r.at("network").at("removal");
  EXPECT_TRUE(removal.contains("removed_capec_count"));
  EXPECT_TRUE(removal.contains("removed_actor_count"));
  const auto& clusters = r.at("clusters");
  double by_label = 0;
  for (const auto& [label, pct] : clusters.at("pct_by_label").items()) by_label += pct.get<double>();
  EXPECT_NEAR(by_label, clusters.at("pct_total").get<double>(), 1e-9);
  EXPECT_EQ(r, nlohmann::json::parse(r.dump()));
}

TEST(Report, TextHasEveryTable) {
  const auto text = coi::render_report_text(coi::build_report(sources()));
  for (const char* heading : {"Communities of interest", "popularity limit", "one-timers", "CAPECs without a skill level"}) {
    EXPECT_NE(text.find(heading), std::string::npos) << heading;
  }
  for (const auto& c : sources().clusters.at("clusters")) {
    EXPECT_NE(text.find(c.at("label").get<std::string>()), std::string::npos);
  }
}

TEST(Report, SkippedClusteringRendered) {
  auto s = sources();
  s.clusters = {{"skipped", true}, {"sample_size", 1}, {"reason", "sample has 1 actors; clustering needs at least 3"}};
  const auto r = coi::build_report(s);
  EXPECT_FALSE(r.at("clusters").contains("rows"));
  EXPECT_NE(coi::render_report_text(r).find("clustering needs at least 3"), std::string::npos);
}

TEST(Report, MissingFieldIsValidationError) {
  auto s = sources();
  s.graph_stats.erase("removal");
  EXPECT_THROW(coi::build_report(s), coi::ValidationError);
  s = sources();
  s.clusters.erase("skipped");
  EXPECT_THROW(coi::build_report(s), coi::ValidationError);
  s = sources();
  s.communities = nlohmann::json::array();
  EXPECT_THROW(coi::build_report(s), coi::ValidationError);
}

}  // namespace
