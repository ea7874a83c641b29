#include "coi/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coi/error.hpp"
#include "coi/util/csv.hpp"
#include "coi/util/hash.hpp"

namespace coi {
namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  int value = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return value;
}

int json_id(const json& v, const char* what, CapecId owner) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    std::string_view s = v.get_ref<const std::string&>();
    if (auto cwe = parse_cwe_id(s)) return *cwe;
    if (lower(s).rfind("capec-", 0) == 0) s.remove_prefix(6);
    if (auto n = parse_int(s)) return *n;
  }
  throw ValidationError("capec " + std::to_string(owner) + ": bad " + what + " entry " + v.dump());
}

std::set<int> json_id_set(const json& obj, const char* key, CapecId owner) {
  std::set<int> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ValidationError("capec " + std::to_string(owner) + ": '" + key + "' must be an array");
  for (const auto& v : *it) out.insert(json_id(v, key, owner));
  return out;
}

std::vector<CveEntry> parse_cve_cwe_csv(std::istream& in, const std::string& origin) {
  std::map<CveId, CveEntry> entries;
  std::set<std::pair<CveId, CweId>> seen;
  csv::Reader reader(in);
  bool first = true;
  while (auto row = reader.next()) {
    const bool header = first && !row->empty() && lower(trim((*row)[0])) == "cve_id";
    first = false;
    if (header) continue;
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;
    if (row->size() != 2) {
      throw ValidationError(origin + ":" + std::to_string(reader.line()) + ": expected 2 columns");
    }
    auto cve = CveId::parse(trim((*row)[0]));
    if (!cve) {
      throw ValidationError(origin + ":" + std::to_string(reader.line()) + ": bad CVE id '" + (*row)[0] + "'");
    }
    auto& entry = entries[*cve];
    entry.cve_id = *cve;
    const auto cwe_text = trim((*row)[1]);
    if (cwe_text.empty()) continue;
    if (auto cwe = parse_cwe_id(cwe_text)) {
      if (!seen.insert({*cve, *cwe}).second) {
        throw ValidationError(origin + ":" + std::to_string(reader.line()) + ": duplicate row " +
                              cve->str() + ",CWE-" + std::to_string(*cwe));
      }
      entry.cwe_ids.insert(*cwe);
    }
  }
  std::vector<CveEntry> out;
  out.reserve(entries.size());
  for (auto& [id, e] : entries) out.push_back(std::move(e));
  return out;
}

std::vector<CapecEntry> parse_capec_json(const std::string& text, const std::string& origin) {
  if (trim(text).empty()) return {};
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ValidationError(origin + ": invalid JSON");
  if (doc.is_object() && doc.contains("capecs")) doc = doc["capecs"];
  if (!doc.is_array()) throw ValidationError(origin + ": expected an array of CAPEC objects");

  std::vector<CapecEntry> out;
  out.reserve(doc.size());
  for (const auto& obj : doc) {
    if (!obj.is_object() || !obj.contains("id")) throw ValidationError(origin + ": CAPEC object without 'id'");
    CapecEntry e;
    e.id = json_id(obj["id"], "id", 0);
    if (auto it = obj.find("name"); it != obj.end() && it->is_string()) e.name = it->get<std::string>();
    e.related_cwes = json_id_set(obj, "related_cwes", e.id);
    e.parents = json_id_set(obj, "parents", e.id);
    e.children = json_id_set(obj, "children", e.id);
    if (auto it = obj.find("skill_scenarios"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) throw ValidationError("capec " + std::to_string(e.id) + ": 'skill_scenarios' must be an array");
      for (const auto& s : *it) {
        std::optional<SkillLevel> level;
        if (s.is_string()) level = parse_skill_level(s.get<std::string>());
        else if (s.is_number_integer() && s.get<int>() >= 1 && s.get<int>() <= 3) level = static_cast<SkillLevel>(s.get<int>());
        if (!level) throw ValidationError("capec " + std::to_string(e.id) + ": bad skill scenario " + s.dump());
        e.skill_scenarios.push_back(*level);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

std::string_view to_string(SkillLevel level) noexcept {
  switch (level) {
    case SkillLevel::kLow: return "Low";
    case SkillLevel::kMedium: return "Medium";
    case SkillLevel::kHigh: return "High";
  }
  return "?";
}

std::optional<SkillLevel> parse_skill_level(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "low") return SkillLevel::kLow;
  if (t == "medium") return SkillLevel::kMedium;
  if (t == "high") return SkillLevel::kHigh;
  return std::nullopt;
}

std::optional<Imputation> parse_imputation(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "parent-first") return Imputation::kParentFirst;
  if (t == "child-first") return Imputation::kChildFirst;
  if (t == "none") return Imputation::kNone;
  return std::nullopt;
}

std::string_view to_string(Imputation mode) noexcept {
  switch (mode) {
    case Imputation::kParentFirst: return "parent-first";
    case Imputation::kChildFirst: return "child-first";
    case Imputation::kNone: return "none";
  }
  return "?";
}

std::optional<CweId> parse_cwe_id(std::string_view text) {
  text = trim(text);
  if (text.size() > 4 && lower(text.substr(0, 4)) == "cwe-") text.remove_prefix(4);
  auto n = parse_int(text);
  if (!n || *n < 0) return std::nullopt;
  return *n;
}

CatalogSnapshot CatalogSnapshot::build(std::vector<CveEntry> cves, std::vector<CapecEntry> capecs) {
  CatalogSnapshot snap;
  for (auto& e : cves) {
    const auto id = e.cve_id;
    if (!snap.cves_.emplace(id, std::move(e)).second) {
      throw ValidationError("duplicate CVE id " + id.str());
    }
  }
  for (auto& e : capecs) {
    const auto id = e.id;
    if (!snap.capecs_.emplace(id, std::move(e)).second) {
      throw ValidationError("duplicate CAPEC id " + std::to_string(id));
    }
  }

  // Symmetrise hierarchy links and reject dangling ones.
  for (auto& [id, e] : snap.capecs_) {
    for (CapecId p : e.parents) {
      auto it = snap.capecs_.find(p);
      if (it == snap.capecs_.end()) {
        throw ValidationError("CAPEC " + std::to_string(id) + " lists unknown parent " + std::to_string(p));
      }
      it->second.children.insert(id);
    }
    for (CapecId c : e.children) {
      auto it = snap.capecs_.find(c);
      if (it == snap.capecs_.end()) {
        throw ValidationError("CAPEC " + std::to_string(id) + " lists unknown child " + std::to_string(c));
      }
      it->second.parents.insert(id);
    }
  }

  // Cycle check over parent links: 0 = unvisited, 1 = on stack, 2 = done.
  std::map<CapecId, int> state;
  for (const auto& [root, unused] : snap.capecs_) {
    if (state[root] != 0) continue;
    std::vector<std::pair<CapecId, std::set<CapecId>::const_iterator>> stack;
    state[root] = 1;
    stack.emplace_back(root, snap.capecs_.at(root).parents.begin());
    while (!stack.empty()) {
      auto& [node, it] = stack.back();
      const auto& parents = snap.capecs_.at(node).parents;
      if (it == parents.end()) {
        state[node] = 2;
        stack.pop_back();
        continue;
      }
      const CapecId next = *it++;
      if (state[next] == 1) {
        throw ValidationError("CAPEC hierarchy cycle through " + std::to_string(next));
      }
      if (state[next] == 0) {
        state[next] = 1;
        stack.emplace_back(next, snap.capecs_.at(next).parents.begin());
      }
    }
  }

  for (const auto& [id, e] : snap.capecs_) {
    for (CweId cwe : e.related_cwes) snap.cwe_to_capecs_[cwe].insert(id);
  }
  return snap;
}

const CapecEntry& CatalogSnapshot::capec(CapecId id) const {
  auto it = capecs_.find(id);
  if (it == capecs_.end()) throw LookupError("unknown CAPEC " + std::to_string(id));
  return it->second;
}

std::set<CapecId> CatalogSnapshot::map_cve_to_capecs(const CveId& cve) const {
  std::set<CapecId> out;
  auto it = cves_.find(cve);
  if (it == cves_.end()) return out;
  for (CweId cwe : it->second.cwe_ids) {
    if (auto m = cwe_to_capecs_.find(cwe); m != cwe_to_capecs_.end()) {
      out.insert(m->second.begin(), m->second.end());
    }
  }
  return out;
}

std::optional<SkillLevel> CatalogSnapshot::direct_skill(const CapecEntry& entry) const {
  if (entry.skill_scenarios.empty()) return std::nullopt;
  return *std::max_element(entry.skill_scenarios.begin(), entry.skill_scenarios.end());
}

std::optional<SkillLevel> CatalogSnapshot::ancestor_skill(const CapecEntry& entry) const {
  std::optional<SkillLevel> best;
  for (CapecId p : entry.parents) {
    const auto& parent = capecs_.at(p);
    auto level = direct_skill(parent);
    if (!level) level = ancestor_skill(parent);
    if (level && (!best || *level > *best)) best = level;
  }
  return best;
}

std::optional<SkillLevel> CatalogSnapshot::child_skill(const CapecEntry& entry) const {
  std::optional<SkillLevel> best;
  for (CapecId c : entry.children) {
    auto level = direct_skill(capecs_.at(c));
    if (level && (!best || *level > *best)) best = level;
  }
  return best;
}

std::optional<SkillLevel> CatalogSnapshot::effective_skill(CapecId id, Imputation mode) const {
  const auto& entry = capec(id);
  if (auto direct = direct_skill(entry)) return direct;
  switch (mode) {
    case Imputation::kParentFirst:
      if (auto up = ancestor_skill(entry)) return up;
      return child_skill(entry);
    case Imputation::kChildFirst:
      if (auto down = child_skill(entry)) return down;
      return ancestor_skill(entry);
    case Imputation::kNone:
      break;
  }
  return std::nullopt;
}

std::size_t CatalogSnapshot::cwe_count() const {
  std::set<CweId> all;
  for (const auto& [id, e] : cves_) all.insert(e.cwe_ids.begin(), e.cwe_ids.end());
  for (const auto& [cwe, unused] : cwe_to_capecs_) all.insert(cwe);
  return all.size();
}

CatalogSnapshot load_snapshot(const std::filesystem::path& dir) {
  return load_snapshot(dir / kCveCweFile, dir / kCapecFile);
}

CatalogSnapshot load_snapshot(const std::filesystem::path& cve_cwe_csv,
                              const std::filesystem::path& capec_json) {
  std::ifstream csv_in(cve_cwe_csv, std::ios::binary);
  if (!csv_in) throw_io("cannot open catalog file", cve_cwe_csv.string());
  auto cves = parse_cve_cwe_csv(csv_in, cve_cwe_csv.filename().string());
  auto capecs = parse_capec_json(read_file(capec_json), capec_json.filename().string());
  return CatalogSnapshot::build(std::move(cves), std::move(capecs));
}

std::string render_cve_cwe_csv(const CatalogSnapshot& snapshot) {
  std::ostringstream out;
  csv::write_row(out, {"cve_id", "cwe_id"});
  for (const auto& [id, e] : snapshot.cves()) {
    if (e.cwe_ids.empty()) {
      csv::write_row(out, {id.str(), ""});
      continue;
    }
    for (CweId cwe : e.cwe_ids) csv::write_row(out, {id.str(), "CWE-" + std::to_string(cwe)});
  }
  return std::move(out).str();
}

std::string render_capec_json(const CatalogSnapshot& snapshot) {
  json doc = json::array();
  for (const auto& [id, e] : snapshot.capecs()) {
    json scenarios = json::array();
    for (auto s : e.skill_scenarios) scenarios.push_back(std::string(to_string(s)));
    doc.push_back(json{{"id", id},
                       {"name", e.name},
                       {"related_cwes", e.related_cwes},
                       {"parents", e.parents},
                       {"children", e.children},
                       {"skill_scenarios", std::move(scenarios)}});
  }
  return doc.dump(1) + "\n";
}

void write_snapshot(const CatalogSnapshot& snapshot, const std::filesystem::path& dir) {
  write_file_atomic(dir / kCveCweFile, render_cve_cwe_csv(snapshot));
  write_file_atomic(dir / kCapecFile, render_capec_json(snapshot));
}

}  // namespace coi
