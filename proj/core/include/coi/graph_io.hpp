#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coi/graph.hpp"

namespace coi {

enum class GraphFormat { kGraphML, kDot, kCsv };

/// "graphml", "dot" or "csv"; throws ValidationError otherwise.
GraphFormat parse_graph_format(std::string_view name);
std::string_view to_string(GraphFormat format) noexcept;

/// Community id per node index, as produced by community detection.
using NodeCommunities = std::vector<int>;

/// Every node carries its `mode` (actor / capec) and, when given, its
/// community. The CSV form is an edge list whose columns name the mode.
std::string export_graph(const BimodalGraph& graph, GraphFormat format,
                         const NodeCommunities* communities = nullptr);

struct ImportedGraph {
  BimodalGraph graph;
  std::optional<NodeCommunities> communities;
};

/// Reads back the output of export_graph. Throws ValidationError on input it
/// does not recognise.
ImportedGraph import_graph(std::string_view text, GraphFormat format);

}  // namespace coi
