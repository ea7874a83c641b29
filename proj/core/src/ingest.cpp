#include "coi/ingest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coi/error.hpp"

namespace coi {
namespace {

using nlohmann::json;

constexpr const char* kRequiredKeys[] = {"post_id", "actor_id", "forum_id", "timestamp", "content"};

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

void finalize(std::vector<CorpusPost>& posts, std::map<std::string, std::vector<std::size_t>>& index,
              CorpusStats& stats) {
  std::sort(posts.begin(), posts.end(),
            [](const CorpusPost& a, const CorpusPost& b) { return a.record.post_id < b.record.post_id; });
  for (std::size_t i = 1; i < posts.size(); ++i) {
    if (posts[i].record.post_id == posts[i - 1].record.post_id) {
      throw ValidationError("duplicate post_id '" + posts[i].record.post_id + "'");
    }
  }
  std::set<std::string> forums;
  CveSet cves;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    index[posts[i].record.actor_id].push_back(i);
    forums.insert(posts[i].record.forum_id);
    cves.insert(posts[i].mentions.begin(), posts[i].mentions.end());
  }
  stats = CorpusStats{posts.size(), index.size(), forums.size(), cves.size()};
}

}  // namespace

ParseResult parse_posts(std::istream& in, const ParseOptions& options) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  auto skip = [&](const std::string& why) {
    ++result.skipped;
    if (result.warnings.size() < options.max_warnings) {
      result.warnings.push_back("line " + std::to_string(line_no) + ": " + why);
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      skip("not a JSON object");
      continue;
    }
    bool ok = true;
    for (const char* key : kRequiredKeys) {
      auto it = obj.find(key);
      if (it == obj.end() || !it->is_string()) {
        skip(std::string("missing or non-string '") + key + "'");
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    PostRecord post;
    post.post_id = obj["post_id"].get<std::string>();
    post.actor_id = obj["actor_id"].get<std::string>();
    post.forum_id = obj["forum_id"].get<std::string>();
    post.content = obj["content"].get<std::string>();
    if (post.post_id.empty() || post.actor_id.empty()) {
      skip("empty post_id or actor_id");
      continue;
    }
    const auto ts = parse_timestamp(obj["timestamp"].get<std::string>());
    if (!ts) {
      skip("unparseable timestamp");
      continue;
    }
    if (*ts < options.not_before || *ts >= options.not_after) {
      skip("timestamp outside validity window");
      continue;
    }
    post.timestamp = *ts;
    result.posts.push_back(std::move(post));
  }
  if (in.bad()) throw IoError("read error while parsing posts");
  return result;
}

ParseResult parse_posts_file(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open post input", path.string());
  return parse_posts(in, options);
}

std::size_t Corpus::post_count(const std::string& actor_id) const {
  auto it = actor_index_.find(actor_id);
  return it == actor_index_.end() ? 0 : it->second.size();
}

Corpus build_corpus(std::vector<PostRecord> posts) {
  std::set<std::string_view> seen;
  for (const auto& p : posts) {
    if (!seen.insert(p.post_id).second) {
      throw ValidationError("duplicate post_id '" + p.post_id + "'");
    }
  }
  Corpus corpus;
  for (auto& p : posts) {
    CveSet mentions = extract_cve_ids(p.content);
    if (mentions.empty()) continue;
    corpus.posts_.push_back(CorpusPost{std::move(p), std::move(mentions)});
  }
  finalize(corpus.posts_, corpus.actor_index_, corpus.stats_);
  return corpus;
}

Corpus corpus_from_posts(std::vector<CorpusPost> posts) {
  Corpus corpus;
  for (auto& p : posts) {
    if (p.mentions.empty()) {
      throw ValidationError("corpus post '" + p.record.post_id + "' has no CVE mentions");
    }
    corpus.posts_.push_back(std::move(p));
  }
  finalize(corpus.posts_, corpus.actor_index_, corpus.stats_);
  return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.posts()) {
    json mentions = json::array();
    for (const auto& id : p.mentions) mentions.push_back(id.str());
    json obj = {{"post_id", p.record.post_id},
                {"actor_id", p.record.actor_id},
                {"forum_id", p.record.forum_id},
                {"timestamp", format_timestamp(p.record.timestamp)},
                {"content", p.record.content},
                {"mentions", std::move(mentions)}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

Corpus corpus_from_jsonl(std::istream& in) {
  std::vector<CorpusPost> posts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      const json obj = json::parse(line);
      CorpusPost post;
      post.record.post_id = obj.at("post_id").get<std::string>();
      post.record.actor_id = obj.at("actor_id").get<std::string>();
      post.record.forum_id = obj.at("forum_id").get<std::string>();
      post.record.content = obj.at("content").get<std::string>();
      const auto ts = parse_timestamp(obj.at("timestamp").get<std::string>());
      if (!ts) throw ValidationError("bad timestamp");
      post.record.timestamp = *ts;
      for (const auto& m : obj.at("mentions")) {
        auto id = CveId::parse(m.get<std::string>());
        if (!id) throw ValidationError("bad CVE id '" + m.get<std::string>() + "'");
        post.mentions.insert(*id);
      }
      posts.push_back(std::move(post));
    } catch (const json::exception& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus_from_posts(std::move(posts));
}

nlohmann::json corpus_stats_json(const CorpusStats& stats) {
  return json{{"posts", stats.posts},
              {"actors", stats.actors},
              {"forums", stats.forums},
              {"distinct_cves", stats.distinct_cves}};
}

}  // namespace coi
