#include "coi/workspace.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>

#include "coi/error.hpp"
#include "coi/util/hash.hpp"

namespace coi {
namespace fs = std::filesystem;
namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kLockFile = ".lock";

struct StageInfo {
  Stage stage;
  const char* name;
  const char* dir;
};

constexpr std::array<StageInfo, 8> kStages{{
    {Stage::kSynth, "synth", "synth"},
    {Stage::kIngest, "ingest", "corpus"},
    {Stage::kCatalog, "catalog", "catalog"},
    {Stage::kGraph, "graph", "graph"},
    {Stage::kCommunities, "communities", "communities"},
    {Stage::kExpertise, "expertise", "expertise"},
    {Stage::kCluster, "cluster", "cluster"},
    {Stage::kReport, "report", "report"},
}};

const StageInfo& info(Stage stage) {
  return *std::find_if(kStages.begin(), kStages.end(), [&](const StageInfo& s) { return s.stage == stage; });
}

std::string command_for(Stage stage) {
  return stage == Stage::kCatalog ? "convert-catalog" : std::string(stage_name(stage));
}

}  // namespace

std::string_view stage_name(Stage stage) noexcept { return info(stage).name; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto& s : kStages) {
    if (name == s.name) return s.stage;
  }
  return std::nullopt;
}

std::vector<Stage> upstream_of(Stage stage) {
  switch (stage) {
    case Stage::kSynth:
    case Stage::kIngest:
    case Stage::kCatalog: return {};
    case Stage::kGraph: return {Stage::kIngest, Stage::kCatalog};
    case Stage::kCommunities: return {Stage::kGraph};
    case Stage::kExpertise: return {Stage::kIngest, Stage::kCatalog, Stage::kGraph, Stage::kCommunities};
    case Stage::kCluster: return {Stage::kExpertise};
    case Stage::kReport:
      return {Stage::kIngest, Stage::kGraph, Stage::kCommunities, Stage::kExpertise, Stage::kCluster};
  }
  return {};
}

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoError("cannot create workspace '" + root_.string() + "': " + ec.message());
  const auto manifest_path = root_ / kManifestFile;
  if (fs::exists(manifest_path)) {
    try {
      manifest_ = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("workspace manifest '" + manifest_path.string() + "' is corrupt: " + e.what());
    }
  }
  if (!manifest_.is_object()) manifest_ = nlohmann::json::object();
  if (!manifest_.contains("stages")) manifest_["stages"] = nlohmann::json::object();
}

fs::path Workspace::dir(Stage stage) const { return root_ / info(stage).dir; }

fs::path Workspace::path(Stage stage, std::string_view file) const { return dir(stage) / file; }

bool Workspace::has(Stage stage) const { return manifest_["stages"].contains(stage_name(stage)); }

std::string Workspace::stage_hash(Stage stage) const {
  if (!has(stage)) return {};
  return manifest_["stages"][std::string(stage_name(stage))].value("hash", std::string());
}

nlohmann::json Workspace::stage_config(Stage stage) const {
  if (!has(stage)) return nullptr;
  return manifest_["stages"][std::string(stage_name(stage))].value("config", nlohmann::json(nullptr));
}

void Workspace::require_upstream(Stage stage, bool force) const {
  std::vector<Stage> visited;
  check_stage(stage, force, visited);
}

bool Workspace::is_current(Stage stage) const {
  if (!has(stage)) return false;
  const auto& recorded = manifest_["stages"][std::string(stage_name(stage))].value("upstream", nlohmann::json::object());
  for (Stage up : upstream_of(stage)) {
    const std::string name(stage_name(up));
    if (!recorded.contains(name) || recorded[name].get<std::string>() != stage_hash(up)) return false;
  }
  return true;
}

void Workspace::check_stage(Stage stage, bool force, std::vector<Stage>& visited) const {
  for (Stage up : upstream_of(stage)) {
    if (std::find(visited.begin(), visited.end(), up) != visited.end()) continue;
    visited.push_back(up);
    const std::string up_name(stage_name(up));
    if (!has(up)) {
      throw UpstreamError("stage '" + std::string(stage_name(stage)) + "' needs the output of '" + up_name +
                          "', which has not been run in " + root_.string() + "; run `coi " + command_for(up) +
                          "` first");
    }
    const auto& entry = manifest_["stages"][up_name];
    for (const auto& [rel, hash] : entry.at("outputs").items()) {
      const auto file = root_ / rel;
      if (!fs::exists(file)) {
        throw UpstreamError("artifact '" + rel + "' of stage '" + up_name + "' is missing; re-run `coi " +
                            command_for(up) + "`");
      }
      if (!force && sha256_file(file) != hash.get<std::string>()) {
        throw UpstreamError("artifact '" + rel + "' of stage '" + up_name +
                            "' changed since it was recorded; re-run `coi " + command_for(up) +
                            "` or pass --force");
      }
    }
    if (!force) {
      const auto& recorded = entry.value("upstream", nlohmann::json::object());
      for (Stage upup : upstream_of(up)) {
        const std::string name(stage_name(upup));
        if (!recorded.contains(name) || recorded[name].get<std::string>() != stage_hash(upup)) {
          throw UpstreamError("stage '" + up_name + "' is stale: '" + name + "' was re-run after it; re-run `coi " +
                              command_for(up) + "` or pass --force");
        }
      }
    }
    check_stage(up, force, visited);
  }
}

void Workspace::commit(Stage stage, const nlohmann::json& config,
                       const std::vector<std::pair<std::string, std::string>>& files) {
  const std::string name(stage_name(stage));
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& [file, contents] : files) {
    const auto target = path(stage, file);
    write_file_atomic(target, contents);
    outputs[fs::path(info(stage).dir).append(file).generic_string()] = sha256_hex(contents);
  }
  if (has(stage)) {
    for (const auto& [rel, hash] : manifest_["stages"][name]["outputs"].items()) {
      if (!outputs.contains(rel)) {
        std::error_code ec;
        fs::remove(root_ / rel, ec);
      }
    }
  }
  std::string joined;
  for (const auto& [rel, hash] : outputs.items()) joined += rel + " " + hash.get<std::string>() + "\n";

  nlohmann::json upstream = nlohmann::json::object();
  for (Stage up : upstream_of(stage)) upstream[std::string(stage_name(up))] = stage_hash(up);

  manifest_["stages"][name] = {{"config", config}, {"upstream", upstream}, {"outputs", outputs}, {"hash", sha256_hex(joined)}};
  save_manifest();
}

std::vector<std::pair<std::string, std::string>> Workspace::artifact_hashes() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [stage, entry] : manifest_["stages"].items()) {
    for (const auto& [rel, hash] : entry.at("outputs").items()) out.emplace_back(rel, hash.get<std::string>());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Workspace::save_manifest() const { write_file_atomic(root_ / kManifestFile, manifest_.dump(2) + "\n"); }

WorkspaceLock::WorkspaceLock(const Workspace& workspace) : path_(workspace.root() / kLockFile) {
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw IoError("workspace '" + workspace.root().string() + "' is locked by another run (delete " +
                    path_.string() + " if no run is active)");
    }
    throw_io("cannot create lock file", path_.string());
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkspaceLock::~WorkspaceLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

fs::path default_workspace_root() {
  if (const char* env = std::getenv("COI_WORKSPACE"); env && *env) return env;
  return fs::current_path() / "coi-workspace";
}

}  // namespace coi
