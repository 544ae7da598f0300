#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace ddflow {

using NodeId = std::int64_t;

enum class NodeKind : std::uint8_t {
  Method,
  ParameterIn,
  ParameterOut,
  MethodReturn,
  Call,
  Identifier,
  Literal,
  Return,
  ControlStructure,
  Block,
  ExternalMethodStub,
};

enum class EdgeKind : std::uint8_t { AST, CFG, CDG, DDG, CALL, ARGUMENT, REF };

inline constexpr std::size_t kEdgeKindCount = 7;

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view text);
std::optional<EdgeKind> edge_kind_from_string(std::string_view text);

/// Raised when a graph operation would break a structural invariant.
class CpgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by load_cpg for malformed documents.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CpgNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Identifier;
  std::string code;
  std::string name;
  std::string fullName;
  int argumentIndex = -1;
  int lineNumber = 0;
  NodeId methodId = 0;
};

struct CpgEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::AST;
  std::string variable;  // DDG only

  friend bool operator==(const CpgEdge&, const CpgEdge&) = default;
};

/// Property graph holding every program layer. Built by a single writer,
/// then read concurrently by query workers; nothing mutates it afterwards.
class Cpg {
 public:
  /// Assigns the next dense id (starting at 1) and stores the node. The
  /// `id` field of `attrs` is ignored.
  NodeId add_node(CpgNode attrs);

  /// Adds an edge. Re-adding an identical edge is a no-op; adjacency lists
  /// hold each neighbour once even when several labelled DDG edges connect
  /// the same pair.
  void add_edge(NodeId src, NodeId dst, EdgeKind kind, std::string variable = {});

  bool contains(NodeId id) const { return id >= 1 && id <= static_cast<NodeId>(nodes_.size()); }
  const CpgNode& node(NodeId id) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::span<const CpgNode> nodes() const { return nodes_; }
  std::span<const CpgEdge> edges() const { return edges_; }

  /// Ascending by neighbour id.
  std::span<const NodeId> out_neighbors(NodeId id, EdgeKind kind) const;
  std::span<const NodeId> in_neighbors(NodeId id, EdgeKind kind) const;

  bool has_edge(NodeId src, NodeId dst, EdgeKind kind) const;
  /// Labels of all DDG edges src -> dst, ascending.
  std::vector<std::string> ddg_labels(NodeId src, NodeId dst) const;

  std::optional<NodeId> method_by_name(std::string_view fullName) const;
  const std::map<std::string, NodeId, std::less<>>& method_index() const { return methodIndex_; }

  /// Fills in missing ids: used by the frontend when a node needs its own id
  /// as methodId.
  void set_method_id(NodeId id, NodeId methodId);
  void set_argument_index(NodeId id, int index);

 private:
  struct Adjacency {
    std::vector<NodeId> out[kEdgeKindCount];
    std::vector<NodeId> in[kEdgeKindCount];
  };

  void check_exists(NodeId id, const char* what) const;

  std::vector<CpgNode> nodes_;
  std::vector<Adjacency> adjacency_;
  std::vector<CpgEdge> edges_;
  std::map<std::pair<NodeId, NodeId>, std::vector<std::string>> ddgLabels_;
  std::map<std::string, NodeId, std::less<>> methodIndex_;
};

/// Stable JSON form (see README for the schema). Nodes in id order, edges in
/// insertion order.
std::string serialize_cpg(const Cpg& cpg);
Cpg load_cpg(std::string_view document);

/// Canonical text of the DDG edge set (sorted), used to compare graphs.
std::string serialize_ddg_edges(const Cpg& cpg);

}  // namespace ddflow
