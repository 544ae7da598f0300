#include "ddflow/cpg.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ddflow {

namespace {

constexpr std::array<std::string_view, 11> kNodeKindNames = {
    "Method", "ParameterIn", "ParameterOut", "MethodReturn", "Call", "Identifier",
    "Literal", "Return", "ControlStructure", "Block", "ExternalMethodStub"};

constexpr std::array<std::string_view, kEdgeKindCount> kEdgeKindNames = {
    "AST", "CFG", "CDG", "DDG", "CALL", "ARGUMENT", "REF"};

bool is_method_like(NodeKind kind) {
  return kind == NodeKind::Method || kind == NodeKind::ExternalMethodStub;
}

void insert_sorted(std::vector<NodeId>& list, NodeId id) {
  auto it = std::lower_bound(list.begin(), list.end(), id);
  if (it == list.end() || *it != id) list.insert(it, id);
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kNodeKindNames[static_cast<std::size_t>(kind)]; }
std::string_view to_string(EdgeKind kind) { return kEdgeKindNames[static_cast<std::size_t>(kind)]; }

std::optional<NodeKind> node_kind_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kNodeKindNames.size(); ++i)
    if (kNodeKindNames[i] == text) return static_cast<NodeKind>(i);
  return std::nullopt;
}

std::optional<EdgeKind> edge_kind_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kEdgeKindNames.size(); ++i)
    if (kEdgeKindNames[i] == text) return static_cast<EdgeKind>(i);
  return std::nullopt;
}

void Cpg::check_exists(NodeId id, const char* what) const {
  if (!contains(id)) {
    std::ostringstream msg;
    msg << what << ": unknown node id " << id;
    throw CpgError(msg.str());
  }
}

NodeId Cpg::add_node(CpgNode attrs) {
  if (is_method_like(attrs.kind)) {
    if (attrs.fullName.empty()) throw CpgError("method node requires a fullName");
    if (methodIndex_.contains(attrs.fullName))
      throw CpgError("duplicate method fullName '" + attrs.fullName + "'");
  } else if (!attrs.fullName.empty()) {
    throw CpgError("fullName is only allowed on Method and ExternalMethodStub nodes");
  }
  attrs.id = static_cast<NodeId>(nodes_.size()) + 1;
  if (is_method_like(attrs.kind)) methodIndex_.emplace(attrs.fullName, attrs.id);
  nodes_.push_back(std::move(attrs));
  adjacency_.emplace_back();
  return nodes_.back().id;
}

void Cpg::add_edge(NodeId src, NodeId dst, EdgeKind kind, std::string variable) {
  check_exists(src, "edge source");
  check_exists(dst, "edge target");
  const auto& s = node(src);
  const auto& d = node(dst);
  switch (kind) {
    case EdgeKind::CALL:
      if (s.kind != NodeKind::Call) throw CpgError("CALL edge must start at a Call node");
      if (!is_method_like(d.kind)) throw CpgError("CALL edge must target a method");
      break;
    case EdgeKind::ARGUMENT:
      if (s.kind != NodeKind::Call) throw CpgError("ARGUMENT edge must start at a Call node");
      break;
    case EdgeKind::DDG:
      if (variable.empty()) throw CpgError("DDG edge requires a variable label");
      break;
    default:
      break;
  }
  if (kind != EdgeKind::DDG) variable.clear();

  const auto k = static_cast<std::size_t>(kind);
  if (kind == EdgeKind::DDG) {
    auto& labels = ddgLabels_[{src, dst}];
    if (std::find(labels.begin(), labels.end(), variable) != labels.end()) return;
    labels.insert(std::lower_bound(labels.begin(), labels.end(), variable), variable);
  } else if (has_edge(src, dst, kind)) {
    return;
  }
  insert_sorted(adjacency_[src - 1].out[k], dst);
  insert_sorted(adjacency_[dst - 1].in[k], src);
  edges_.push_back(CpgEdge{src, dst, kind, std::move(variable)});
}

const CpgNode& Cpg::node(NodeId id) const {
  check_exists(id, "node lookup");
  return nodes_[id - 1];
}

std::span<const NodeId> Cpg::out_neighbors(NodeId id, EdgeKind kind) const {
  check_exists(id, "out_neighbors");
  return adjacency_[id - 1].out[static_cast<std::size_t>(kind)];
}

std::span<const NodeId> Cpg::in_neighbors(NodeId id, EdgeKind kind) const {
  check_exists(id, "in_neighbors");
  return adjacency_[id - 1].in[static_cast<std::size_t>(kind)];
}

bool Cpg::has_edge(NodeId src, NodeId dst, EdgeKind kind) const {
  auto out = out_neighbors(src, kind);
  return std::binary_search(out.begin(), out.end(), dst);
}

std::vector<std::string> Cpg::ddg_labels(NodeId src, NodeId dst) const {
  auto it = ddgLabels_.find({src, dst});
  if (it == ddgLabels_.end()) return {};
  return it->second;
}

std::optional<NodeId> Cpg::method_by_name(std::string_view fullName) const {
  auto it = methodIndex_.find(fullName);
  if (it == methodIndex_.end()) return std::nullopt;
  return it->second;
}

void Cpg::set_method_id(NodeId id, NodeId methodId) {
  check_exists(id, "set_method_id");
  nodes_[id - 1].methodId = methodId;
}

void Cpg::set_argument_index(NodeId id, int index) {
  check_exists(id, "set_argument_index");
  nodes_[id - 1].argumentIndex = index;
}

std::string serialize_cpg(const Cpg& cpg) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["nodes"] = ordered_json::array();
  for (const auto& n : cpg.nodes()) {
    doc["nodes"].push_back(ordered_json{{"id", n.id},
                                        {"kind", std::string(to_string(n.kind))},
                                        {"code", n.code},
                                        {"name", n.name},
                                        {"fullName", n.fullName},
                                        {"argumentIndex", n.argumentIndex},
                                        {"line", n.lineNumber},
                                        {"methodId", n.methodId}});
  }
  doc["edges"] = ordered_json::array();
  for (const auto& e : cpg.edges()) {
    ordered_json edge{{"src", e.src}, {"dst", e.dst}, {"kind", std::string(to_string(e.kind))}};
    if (e.kind == EdgeKind::DDG) edge["variable"] = e.variable;
    doc["edges"].push_back(std::move(edge));
  }
  return doc.dump();
}

namespace {

template <typename T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw IngestError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IngestError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Cpg load_cpg(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IngestError("top level must be an object");
  Cpg cpg;
  // An empty document ({}) is an empty graph.
  const auto nodes = doc.value("nodes", nlohmann::json::array());
  const auto edges = doc.value("edges", nlohmann::json::array());
  if (!nodes.is_array() || !edges.is_array()) throw IngestError("'nodes' and 'edges' must be arrays");

  std::vector<const nlohmann::json*> byId(nodes.size(), nullptr);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto where = "node #" + std::to_string(i);
    if (!nodes[i].is_object()) throw IngestError(where + ": not an object");
    const auto id = field<NodeId>(nodes[i], "id", where);
    if (id < 1 || id > static_cast<NodeId>(nodes.size()))
      throw IngestError(where + ": id " + std::to_string(id) + " is not dense (expected 1.." +
                        std::to_string(nodes.size()) + ")");
    if (byId[id - 1]) throw IngestError(where + ": duplicate id " + std::to_string(id));
    byId[id - 1] = &nodes[i];
  }
  for (std::size_t i = 0; i < byId.size(); ++i) {
    const auto& n = *byId[i];
    const auto where = "node " + std::to_string(i + 1);
    const auto kindText = field<std::string>(n, "kind", where);
    const auto kind = node_kind_from_string(kindText);
    if (!kind) throw IngestError(where + ": unknown kind '" + kindText + "'");
    CpgNode attrs;
    attrs.kind = *kind;
    attrs.code = field<std::string>(n, "code", where);
    attrs.name = field<std::string>(n, "name", where);
    attrs.fullName = field<std::string>(n, "fullName", where);
    attrs.argumentIndex = field<int>(n, "argumentIndex", where);
    attrs.lineNumber = field<int>(n, "line", where);
    attrs.methodId = field<NodeId>(n, "methodId", where);
    try {
      cpg.add_node(std::move(attrs));
    } catch (const CpgError& e) {
      throw IngestError(where + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const auto where = "edge #" + std::to_string(i);
    if (!e.is_object()) throw IngestError(where + ": not an object");
    const auto src = field<NodeId>(e, "src", where);
    const auto dst = field<NodeId>(e, "dst", where);
    const auto kindText = field<std::string>(e, "kind", where);
    const auto kind = edge_kind_from_string(kindText);
    if (!kind) throw IngestError(where + ": unknown kind '" + kindText + "'");
    if (!cpg.contains(src) || !cpg.contains(dst))
      throw IngestError(where + ": dangling edge " + std::to_string(src) + " -> " + std::to_string(dst));
    std::string variable;
    if (*kind == EdgeKind::DDG) {
      variable = field<std::string>(e, "variable", where);
    } else if (e.contains("variable")) {
      throw IngestError(where + ": 'variable' is only allowed on DDG edges");
    }
    try {
      cpg.add_edge(src, dst, *kind, std::move(variable));
    } catch (const CpgError& err) {
      throw IngestError(where + ": " + err.what());
    }
  }
  return cpg;
}

std::string serialize_ddg_edges(const Cpg& cpg) {
  std::vector<std::tuple<NodeId, NodeId, std::string>> rows;
  for (const auto& e : cpg.edges())
    if (e.kind == EdgeKind::DDG) rows.emplace_back(e.src, e.dst, e.variable);
  std::sort(rows.begin(), rows.end());
  std::ostringstream out;
  for (const auto& [s, d, v] : rows) out << s << ' ' << d << ' ' << v << '\n';
  return out.str();
}

}  // namespace ddflow
