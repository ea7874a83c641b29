#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "coi/util/hash.hpp"
#include "test_support.hpp"

namespace {

using testing_support::TempDir;

struct Run {
  int exit_code;
  std::string output;
};

/// Runs the CLI through the shell with stdout and stderr captured to a file.
Run coi(const TempDir& tmp, const std::string& args, const std::string& env = {}) {
  const auto log = tmp.path() / "cli.log";
  const std::string cmd = env + " '" COI_CLI_PATH "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, coi::read_file(log)};
}

std::string ws_flag(const TempDir& tmp, const std::string& name = "ws") {
  return "-w '" + (tmp.path() / name).string() + "'";
}

TEST(Cli, HelpExitsZero) {
  TempDir tmp;
  auto r = coi(tmp, "--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("run-all"), std::string::npos);
}

TEST(Cli, UnknownFlagIsValidationExit) {
  TempDir tmp;
  EXPECT_EQ(coi(tmp, "graph --no-such-flag").exit_code, 1);
  EXPECT_EQ(coi(tmp, "export-graph --format gexf " + ws_flag(tmp)).exit_code, 1);
}

TEST(Cli, ClusterBeforeExpertiseIsUpstreamExit) {
  TempDir tmp;
  auto r = coi(tmp, ws_flag(tmp) + " cluster");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("expertise"), std::string::npos);
}

TEST(Cli, MissingInputIsIoExit) {
  TempDir tmp;
  EXPECT_EQ(coi(tmp, ws_flag(tmp) + " ingest --input '" + (tmp.path() / "nope.jsonl").string() + "'").exit_code, 3);
}

TEST(Cli, StagesInOrderOnFixture) {
  TempDir tmp;
  const auto ws = ws_flag(tmp);
  EXPECT_EQ(coi(tmp, ws + " ingest -i '" + testing_support::fixture("posts.jsonl").string() + "'").exit_code, 0);
  EXPECT_EQ(coi(tmp, ws + " convert-catalog --cve-cwe '" + testing_support::fixture("catalog/cve_cwe.csv").string() +
                         "' --capec-json '" + testing_support::fixture("catalog/capec.json").string() + "'")
                .exit_code,
            0);
  EXPECT_EQ(coi(tmp, ws + " graph").exit_code, 0);
  EXPECT_EQ(coi(tmp, ws + " communities --seed 1").exit_code, 0);
  EXPECT_EQ(coi(tmp, ws + " expertise").exit_code, 0);
  EXPECT_EQ(coi(tmp, ws + " cluster").exit_code, 0);
  auto r = coi(tmp, ws + " report");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "ws" / "report" / "report.json"));
}

TEST(Cli, RunAllSynthIsDeterministic) {
  TempDir tmp;
  ASSERT_EQ(coi(tmp, ws_flag(tmp, "a") + " -q run-all --synth --synth-seed 9").exit_code, 0);
  ASSERT_EQ(coi(tmp, ws_flag(tmp, "b") + " -q run-all --synth --synth-seed 9").exit_code, 0);
  auto outputs = [&](const char* name) {
    return nlohmann::json::parse(coi::read_file(tmp.path() / name / "manifest.json")).at("stages");
  };
  const auto a = outputs("a"), b = outputs("b");
  for (const auto& [stage, entry] : a.items()) EXPECT_EQ(entry.at("outputs"), b.at(stage).at("outputs")) << stage;
}

TEST(Cli, TamperedArtifactNeedsForce) {
  TempDir tmp;
  const auto ws = ws_flag(tmp);
  ASSERT_EQ(coi(tmp, ws + " -q run-all --synth").exit_code, 0);
  {
    std::ofstream(tmp.path() / "ws" / "expertise" / "profiles.csv", std::ios::app) << "\n";
  }
  EXPECT_EQ(coi(tmp, ws + " cluster").exit_code, 2);
}

TEST(Cli, ExportGraphFormats) {
  TempDir tmp;
  const auto ws = ws_flag(tmp);
  ASSERT_EQ(coi(tmp, ws + " -q run-all --synth").exit_code, 0);
  for (const char* format : {"graphml", "dot", "csv"}) {
    const auto out = tmp.path() / (std::string("g.") + format);
    EXPECT_EQ(coi(tmp, ws + " export-graph --format " + format + " -o '" + out.string() + "'").exit_code, 0);
    EXPECT_GT(std::filesystem::file_size(out), 0u) << format;
  }
  EXPECT_NE(coi::read_file(tmp.path() / "g.csv").find("actor_id,capec_id,actor_community,capec_community"),
            std::string::npos);
}

TEST(Cli, WorkspaceFromEnvironment) {
  TempDir tmp;
  const auto root = tmp.path() / "env-ws";
  EXPECT_EQ(coi(tmp, "synth", "COI_WORKSPACE='" + root.string() + "'").exit_code, 0);
  EXPECT_TRUE(std::filesystem::exists(root / "synth" / "posts.jsonl"));
}

TEST(Cli, StandaloneSynthAndConvert) {
  TempDir tmp;
  const auto out = tmp.path() / "gen";
  ASSERT_EQ(coi(tmp, "synth --seed 3 --out '" + out.string() + "'").exit_code, 0);
  EXPECT_TRUE(std::filesystem::exists(out / "truth.json"));
  const auto feeds = testing_support::fixture("feeds");
  auto r = coi(tmp, "convert-catalog --nvd '" + (feeds / "nvd-2.0.json").string() + "' --nvd '" +
                        (feeds / "nvd-1.1.json").string() + "' --capec-csv '" + (feeds / "capec.csv").string() +
                        "' --out '" + (tmp.path() / "cat").string() + "'");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "cat" / "capec.json"));
}

}  // namespace
