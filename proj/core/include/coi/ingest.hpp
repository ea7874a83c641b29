#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coi/cve.hpp"
#include "coi/util/time.hpp"

namespace coi {

struct PostRecord {
  std::string post_id;
  std::string actor_id;
  std::string forum_id;
  Timestamp timestamp;
  std::string content;
};

struct ParseOptions {
  /// Records outside [not_before, not_after) are rejected as malformed.
  Timestamp not_before = std::chrono::sys_days{std::chrono::year{1990} / 1 / 1};
  Timestamp not_after = std::chrono::sys_days{std::chrono::year{2100} / 1 / 1};
  /// Cap on retained warning messages; the skip counter is always exact.
  std::size_t max_warnings = 50;
};

struct ParseResult {
  std::vector<PostRecord> posts;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Reads the JSONL post format: one object per line with string keys
/// `post_id`, `actor_id`, `forum_id`, `timestamp`, `content`. Blank lines are
/// ignored; anything else that does not parse is skipped and counted.
ParseResult parse_posts(std::istream& in, const ParseOptions& options = {});
ParseResult parse_posts_file(const std::filesystem::path& path, const ParseOptions& options = {});

struct CorpusPost {
  PostRecord record;
  CveSet mentions;
};

struct CorpusStats {
  std::size_t posts = 0;
  std::size_t actors = 0;
  std::size_t forums = 0;
  std::size_t distinct_cves = 0;

  bool operator==(const CorpusStats&) const = default;
};

/// Posts that mention at least one CVE, ordered by post id, with an actor
/// index. Immutable once built.
class Corpus {
 public:
  Corpus() = default;

  const std::vector<CorpusPost>& posts() const noexcept { return posts_; }
  const CorpusStats& stats() const noexcept { return stats_; }

  /// actor id -> indices into posts(), ascending.
  const std::map<std::string, std::vector<std::size_t>>& actor_index() const noexcept {
    return actor_index_;
  }

  /// Posts per actor (CVE-mentioning posts only).
  std::size_t post_count(const std::string& actor_id) const;

 private:
  friend Corpus build_corpus(std::vector<PostRecord> posts);
  friend Corpus corpus_from_posts(std::vector<CorpusPost> posts);

  std::vector<CorpusPost> posts_;
  std::map<std::string, std::vector<std::size_t>> actor_index_;
  CorpusStats stats_;
};

/// Extracts mentions, drops posts without any, and indexes the rest.
/// Throws ValidationError naming the first duplicated post id.
Corpus build_corpus(std::vector<PostRecord> posts);

/// Rebuilds a corpus from persisted posts whose mentions are already known.
Corpus corpus_from_posts(std::vector<CorpusPost> posts);

/// Persisted corpus: one JSON object per post carrying its `mentions`.
std::string corpus_to_jsonl(const Corpus& corpus);
Corpus corpus_from_jsonl(std::istream& in);

nlohmann::json corpus_stats_json(const CorpusStats& stats);

}  // namespace coi
