#include "coi/catalog_convert.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "coi/error.hpp"
#include "coi/util/csv.hpp"
#include "coi/util/hash.hpp"

namespace coi {
namespace {

using nlohmann::json;

void add_weakness_values(const json& descriptions, std::set<CweId>& out) {
  if (!descriptions.is_array()) return;
  for (const auto& d : descriptions) {
    auto it = d.find("value");
    if (it == d.end() || !it->is_string()) continue;
    if (auto cwe = parse_cwe_id(it->get<std::string>())) out.insert(*cwe);
  }
}

std::string normalize_header(std::string h) {
  // The official export prefixes the first header with an apostrophe.
  h.erase(std::remove(h.begin(), h.end(), '\''), h.end());
  std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  while (!h.empty() && std::isspace(static_cast<unsigned char>(h.back()))) h.pop_back();
  return h;
}

/// Splits a "::A::B::" multi-value cell into its non-empty items.
std::vector<std::string> split_items(const std::string& cell) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos <= cell.size()) {
    const auto next = cell.find("::", pos);
    auto item = cell.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (!item.empty()) items.push_back(std::move(item));
    if (next == std::string::npos) break;
    pos = next + 2;
  }
  return items;
}

std::optional<int> trailing_int(const std::string& s) {
  std::size_t end = s.size();
  while (end > 0 && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  std::size_t start = end;
  while (start > 0 && std::isdigit(static_cast<unsigned char>(s[start - 1]))) --start;
  if (start == end) return std::nullopt;
  return std::stoi(s.substr(start, end - start));
}

}  // namespace

std::vector<CveEntry> cve_entries_from_nvd(const json& feed) {
  std::map<CveId, std::set<CweId>> merged;
  auto record = [&](const std::string& id_text, std::set<CweId> cwes) {
    auto id = CveId::parse(id_text);
    if (!id) throw ValidationError("NVD feed: bad CVE id '" + id_text + "'");
    merged[*id].insert(cwes.begin(), cwes.end());
  };

  if (auto it = feed.find("vulnerabilities"); it != feed.end() && it->is_array()) {
    for (const auto& v : *it) {
      const auto& cve = v.at("cve");
      std::set<CweId> cwes;
      if (auto w = cve.find("weaknesses"); w != cve.end() && w->is_array()) {
        for (const auto& weakness : *w) {
          if (auto d = weakness.find("description"); d != weakness.end()) add_weakness_values(*d, cwes);
        }
      }
      record(cve.at("id").get<std::string>(), std::move(cwes));
    }
  } else if (auto items = feed.find("CVE_Items"); items != feed.end() && items->is_array()) {
    for (const auto& item : *items) {
      const auto& cve = item.at("cve");
      std::set<CweId> cwes;
      if (auto pt = cve.find("problemtype"); pt != cve.end()) {
        if (auto data = pt->find("problemtype_data"); data != pt->end() && data->is_array()) {
          for (const auto& entry : *data) {
            if (auto d = entry.find("description"); d != entry.end()) add_weakness_values(*d, cwes);
          }
        }
      }
      record(cve.at("CVE_data_meta").at("ID").get<std::string>(), std::move(cwes));
    }
  } else {
    throw ValidationError("NVD feed: neither 'vulnerabilities' nor 'CVE_Items' present");
  }

  std::vector<CveEntry> out;
  out.reserve(merged.size());
  for (auto& [id, cwes] : merged) out.push_back(CveEntry{id, std::move(cwes)});
  return out;
}

CapecConversion capec_entries_from_mitre_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return {};
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col[normalize_header((*header)[i])] = i;
  for (const char* required : {"id", "name"}) {
    if (!col.count(required)) {
      throw ValidationError(std::string("CAPEC CSV: missing column '") + required + "'");
    }
  }
  auto cell = [&](const csv::Row& row, const char* name) -> std::string {
    auto it = col.find(name);
    if (it == col.end() || it->second >= row.size()) return {};
    return row[it->second];
  };

  CapecConversion result;
  while (auto row = reader.next()) {
    if (row->size() == 1 && (*row)[0].empty()) continue;
    CapecEntry e;
    auto id = trailing_int(cell(*row, "id"));
    if (!id) throw ValidationError("CAPEC CSV line " + std::to_string(reader.line()) + ": bad ID");
    e.id = *id;
    e.name = cell(*row, "name");

    for (const auto& item : split_items(cell(*row, "related attack patterns"))) {
      // NATURE:ChildOf:CAPEC ID:122
      const bool child_of = item.find("ChildOf") != std::string::npos;
      const bool parent_of = item.find("ParentOf") != std::string::npos;
      if (!child_of && !parent_of) continue;
      if (auto target = trailing_int(item)) (child_of ? e.parents : e.children).insert(*target);
    }
    for (const auto& item : split_items(cell(*row, "skills required"))) {
      // SKILL:<free text>:LEVEL:High
      const auto pos = item.rfind("LEVEL:");
      if (pos == std::string::npos) continue;
      if (auto level = parse_skill_level(item.substr(pos + 6))) e.skill_scenarios.push_back(*level);
    }
    for (const auto& item : split_items(cell(*row, "related weaknesses"))) {
      if (auto cwe = parse_cwe_id(item)) e.related_cwes.insert(*cwe);
    }
    result.entries.push_back(std::move(e));
  }

  std::set<CapecId> known;
  for (const auto& e : result.entries) known.insert(e.id);
  for (auto& e : result.entries) {
    for (auto* links : {&e.parents, &e.children}) {
      for (auto it = links->begin(); it != links->end();) {
        if (known.count(*it)) {
          ++it;
        } else {
          it = links->erase(it);
          ++result.dropped_links;
        }
      }
    }
  }
  return result;
}

CatalogSnapshot convert_official_feeds(const std::vector<std::filesystem::path>& nvd_feeds,
                                       const std::filesystem::path& capec_csv, ConversionReport* report) {
  std::map<CveId, std::set<CweId>> merged;
  for (const auto& path : nvd_feeds) {
    json feed = json::parse(read_file(path), nullptr, false);
    if (feed.is_discarded()) throw ValidationError("NVD feed '" + path.string() + "': invalid JSON");
    for (auto& e : cve_entries_from_nvd(feed)) merged[e.cve_id].insert(e.cwe_ids.begin(), e.cwe_ids.end());
  }
  std::vector<CveEntry> cves;
  for (auto& [id, cwes] : merged) cves.push_back(CveEntry{id, std::move(cwes)});

  std::ifstream in(capec_csv, std::ios::binary);
  if (!in) throw_io("cannot open CAPEC export", capec_csv.string());
  auto capecs = capec_entries_from_mitre_csv(in);

  if (report) *report = ConversionReport{cves.size(), capecs.entries.size(), capecs.dropped_links};
  return CatalogSnapshot::build(std::move(cves), std::move(capecs.entries));
}

}  // namespace coi
