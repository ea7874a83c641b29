#include "coi/graph_io.hpp"

#include <charconv>
#include <map>
#include <regex>
#include <sstream>

#include "coi/error.hpp"
#include "coi/util/csv.hpp"

namespace coi {
namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string xml_unescape(std::string_view s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [entity, ch] : kEntities) {
        if (s.substr(i, entity.size()) == entity) {
          out.push_back(ch);
          i += entity.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string dot_unquote(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      out.push_back(s[i] == 'n' ? '\n' : s[i]);
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

int to_int(std::string_view s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ValidationError(std::string("graph import: bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

/// Accumulates nodes and edges during import and assembles the graph.
struct Assembler {
  struct Node {
    bool actor = true;
    std::string actor_id;
    CapecId capec = 0;
    std::optional<int> community;
  };
  std::map<std::string, Node> nodes;  // keyed by file-local node id
  std::vector<std::pair<std::string, std::string>> edges;

  ImportedGraph finish() const {
    std::vector<std::pair<std::string, CapecId>> pairs;
    for (const auto& [src, dst] : edges) {
      auto s = nodes.find(src);
      auto d = nodes.find(dst);
      if (s == nodes.end() || d == nodes.end()) throw ValidationError("graph import: edge references unknown node");
      const Node* a = &s->second;
      const Node* c = &d->second;
      if (!a->actor) std::swap(a, c);
      if (!a->actor || c->actor) throw ValidationError("graph import: edge does not join an actor and a CAPEC");
      pairs.emplace_back(a->actor_id, c->capec);
    }
    ImportedGraph out;
    out.graph = BimodalGraph::from_edges(std::move(pairs));

    bool any = false, all = true;
    NodeCommunities communities(out.graph.node_count(), -1);
    for (const auto& [key, n] : nodes) {
      std::optional<std::size_t> idx;
      if (n.actor) {
        idx = out.graph.find_actor(n.actor_id);
      } else if (auto c = out.graph.find_capec(n.capec)) {
        idx = out.graph.capec_node(*c);
      }
      if (!idx) continue;
      if (n.community) {
        communities[*idx] = *n.community;
        any = true;
      } else {
        all = false;
      }
    }
    if (any) {
      if (!all) throw ValidationError("graph import: community attribute present on some nodes only");
      out.communities = std::move(communities);
    }
    return out;
  }
};

std::string render_graphml(const BimodalGraph& g, const NodeCommunities* comm) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"mode\" for=\"node\" attr.name=\"mode\" attr.type=\"string\"/>\n"
      << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n";
  if (comm) out << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n";
  out << "  <graph id=\"actor_capec\" edgedefault=\"undirected\">\n";
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const bool actor = g.is_actor_node(n);
    out << "    <node id=\"n" << n << "\"><data key=\"mode\">" << (actor ? "actor" : "capec")
        << "</data><data key=\"label\">"
        << xml_escape(actor ? g.actors()[n] : std::to_string(g.capecs()[n - g.actor_count()])) << "</data>";
    if (comm) out << "<data key=\"community\">" << (*comm)[n] << "</data>";
    out << "</node>\n";
  }
  for (const auto& e : g.edges()) {
    out << "    <edge source=\"n" << e.actor << "\" target=\"n" << g.capec_node(e.capec) << "\"/>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return std::move(out).str();
}

ImportedGraph parse_graphml(std::string_view text) {
  static const std::regex node_re(R"re(<node\s+id="([^"]*)"\s*>([\s\S]*?)</node>)re");
  static const std::regex data_re(R"re(<data\s+key="([^"]*)"\s*>([\s\S]*?)</data>)re");
  static const std::regex edge_re(R"re(<edge\s+source="([^"]*)"\s+target="([^"]*)"\s*/>)re");
  using It = std::string_view::const_iterator;
  if (text.find("<graphml") == std::string_view::npos) throw ValidationError("graph import: not a GraphML document");

  Assembler as;
  for (std::regex_iterator<It> it(text.begin(), text.end(), node_re), end; it != end; ++it) {
    const std::string id = (*it)[1].str();
    const std::string body = (*it)[2].str();
    std::map<std::string, std::string> data;
    for (std::sregex_iterator d(body.begin(), body.end(), data_re), dend; d != dend; ++d) {
      data[(*d)[1].str()] = xml_unescape((*d)[2].str());
    }
    Assembler::Node node;
    const auto mode = data["mode"];
    if (mode == "actor") {
      node.actor_id = data["label"];
    } else if (mode == "capec") {
      node.actor = false;
      node.capec = to_int(data["label"], "CAPEC label");
    } else {
      throw ValidationError("graph import: node '" + id + "' has no valid mode");
    }
    if (data.count("community")) node.community = to_int(data["community"], "community");
    as.nodes[xml_unescape(id)] = std::move(node);
  }
  for (std::regex_iterator<It> it(text.begin(), text.end(), edge_re), end; it != end; ++it) {
    as.edges.emplace_back(xml_unescape((*it)[1].str()), xml_unescape((*it)[2].str()));
  }
  return as.finish();
}

std::string dot_node_id(const BimodalGraph& g, std::size_t n) {
  return dot_quote(g.is_actor_node(n) ? "actor:" + g.actors()[n]
                                      : "capec:" + std::to_string(g.capecs()[n - g.actor_count()]));
}

std::string render_dot(const BimodalGraph& g, const NodeCommunities* comm) {
  std::ostringstream out;
  out << "graph actor_capec {\n";
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const bool actor = g.is_actor_node(n);
    out << "  " << dot_node_id(g, n) << " [mode=\"" << (actor ? "actor" : "capec")
        << "\", label=" << dot_quote(g.node_label(n));
    if (comm) out << ", community=" << (*comm)[n];
    out << "];\n";
  }
  for (const auto& e : g.edges()) {
    out << "  " << dot_node_id(g, e.actor) << " -- " << dot_node_id(g, g.capec_node(e.capec)) << ";\n";
  }
  out << "}\n";
  return std::move(out).str();
}

ImportedGraph parse_dot(std::string_view text) {
  static const std::string quoted = R"re("((?:[^"\\]|\\.)*)")re";
  static const std::regex node_re("^\\s*" + quoted + R"re(\s*\[mode="(actor|capec)", label=)re" + quoted +
                                  R"re((?:, community=(-?\d+))?\];\s*$)re");
  static const std::regex edge_re("^\\s*" + quoted + "\\s*--\\s*" + quoted + R"re(\s*;\s*$)re");
  if (text.find("graph") == std::string_view::npos) throw ValidationError("graph import: not a DOT document");

  Assembler as;
  std::istringstream in{std::string(text)};
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_match(line, m, edge_re)) {
      as.edges.emplace_back(dot_unquote(m[1].str()), dot_unquote(m[2].str()));
    } else if (std::regex_match(line, m, node_re)) {
      const std::string key = dot_unquote(m[1].str());
      Assembler::Node node;
      const auto colon = key.find(':');
      if (colon == std::string::npos) throw ValidationError("graph import: bad DOT node id '" + key + "'");
      if (m[2] == "actor") {
        node.actor_id = key.substr(colon + 1);
      } else {
        node.actor = false;
        node.capec = to_int(std::string_view(key).substr(colon + 1), "CAPEC id");
      }
      if (m[4].matched) node.community = to_int(m[4].str(), "community");
      as.nodes[key] = std::move(node);
    }
  }
  return as.finish();
}

std::string render_csv(const BimodalGraph& g, const NodeCommunities* comm) {
  std::ostringstream out;
  if (comm) {
    csv::write_row(out, {"actor_id", "capec_id", "actor_community", "capec_community"});
  } else {
    csv::write_row(out, {"actor_id", "capec_id"});
  }
  for (const auto& e : g.edges()) {
    csv::Row row{g.actors()[e.actor], std::to_string(g.capecs()[e.capec])};
    if (comm) {
      row.push_back(std::to_string((*comm)[e.actor]));
      row.push_back(std::to_string((*comm)[g.capec_node(e.capec)]));
    }
    csv::write_row(out, row);
  }
  return std::move(out).str();
}

ImportedGraph parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->size() < 2 || (*header)[0] != "actor_id" || (*header)[1] != "capec_id") {
    throw ValidationError("graph import: CSV header must start with actor_id,capec_id");
  }
  const bool with_comm = header->size() == 4;
  Assembler as;
  while (auto row = reader.next()) {
    if (row->size() == 1 && (*row)[0].empty()) continue;
    if (row->size() != header->size()) throw ValidationError("graph import: ragged CSV row on line " + std::to_string(reader.line()));
    const std::string akey = "a:" + (*row)[0];
    const std::string ckey = "c:" + (*row)[1];
    auto& a = as.nodes[akey];
    a.actor_id = (*row)[0];
    auto& c = as.nodes[ckey];
    c.actor = false;
    c.capec = to_int((*row)[1], "CAPEC id");
    if (with_comm) {
      a.community = to_int((*row)[2], "community");
      c.community = to_int((*row)[3], "community");
    }
    as.edges.emplace_back(akey, ckey);
  }
  return as.finish();
}

}  // namespace

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "graphml") return GraphFormat::kGraphML;
  if (name == "dot") return GraphFormat::kDot;
  if (name == "csv") return GraphFormat::kCsv;
  throw ValidationError("unknown graph format '" + std::string(name) + "' (expected graphml, dot or csv)");
}

std::string_view to_string(GraphFormat format) noexcept {
  switch (format) {
    case GraphFormat::kGraphML: return "graphml";
    case GraphFormat::kDot: return "dot";
    case GraphFormat::kCsv: return "csv";
  }
  return "?";
}

std::string export_graph(const BimodalGraph& graph, GraphFormat format, const NodeCommunities* communities) {
  if (communities && communities->size() != graph.node_count()) {
    throw ValidationError("export_graph: community vector does not match node count");
  }
  switch (format) {
    case GraphFormat::kGraphML: return render_graphml(graph, communities);
    case GraphFormat::kDot: return render_dot(graph, communities);
    case GraphFormat::kCsv: return render_csv(graph, communities);
  }
  throw ValidationError("export_graph: unknown format");
}

ImportedGraph import_graph(std::string_view text, GraphFormat format) {
  switch (format) {
    case GraphFormat::kGraphML: return parse_graphml(text);
    case GraphFormat::kDot: return parse_dot(text);
    case GraphFormat::kCsv: return parse_csv(text);
  }
  throw ValidationError("import_graph: unknown format");
}

}  // namespace coi
