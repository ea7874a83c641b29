#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace coi {

enum class Stage { kSynth, kIngest, kCatalog, kGraph, kCommunities, kExpertise, kCluster, kReport };

std::string_view stage_name(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string_view name);

/// Stages whose artifacts `stage` reads directly.
std::vector<Stage> upstream_of(Stage stage);

/// Directory-backed store of stage artifacts plus `manifest.json`, which
/// records per stage the configuration, the combined hashes of the upstream
/// stages it consumed and the SHA-256 of every file it wrote.
class Workspace {
 public:
  /// Creates the root directory if needed.
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path dir(Stage stage) const;
  std::filesystem::path path(Stage stage, std::string_view file) const;

  const nlohmann::json& manifest() const noexcept { return manifest_; }
  bool has(Stage stage) const;
  /// Combined hash recorded for a stage's outputs.
  std::string stage_hash(Stage stage) const;
  nlohmann::json stage_config(Stage stage) const;

  /// Throws UpstreamError naming the stage when an upstream of `stage` never
  /// ran or lost an artifact, and when an artifact changed on disk or was
  /// produced from older upstream output. The staleness checks are skipped
  /// with `force`.
  void require_upstream(Stage stage, bool force = false) const;

  /// The stage ran and consumed the current output of its direct upstreams.
  bool is_current(Stage stage) const;

  /// Writes the artifacts and records the stage. `files` are (name, contents)
  /// pairs relative to the stage directory. Anything the stage previously
  /// recorded but no longer writes is removed.
  void commit(Stage stage, const nlohmann::json& config,
              const std::vector<std::pair<std::string, std::string>>& files);

  /// Hash per recorded artifact, keyed by workspace-relative path.
  std::vector<std::pair<std::string, std::string>> artifact_hashes() const;

 private:
  void check_stage(Stage stage, bool force, std::vector<Stage>& visited) const;
  void save_manifest() const;

  std::filesystem::path root_;
  nlohmann::json manifest_;
};

/// Exclusive writer lock held for the lifetime of the object.
class WorkspaceLock {
 public:
  /// Throws IoError when another process holds the lock.
  explicit WorkspaceLock(const Workspace& workspace);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Workspace root from the environment variable COI_WORKSPACE, else
/// `coi-workspace` under the current directory.
std::filesystem::path default_workspace_root();

}  // namespace coi
