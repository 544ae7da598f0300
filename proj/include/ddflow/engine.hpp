#pragma once

#include <compare>
#include <map>
#include <memory>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "ddflow/cpg.hpp"
#include "ddflow/semantics.hpp"

namespace ddflow {

/// How a node is being read while walking backwards.
///  Use    - the value consumed at this node (identifier uses, Return, MethodReturn, ParameterOut)
///  Output - the value an argument holds after its call returns
///  Value  - the value a call evaluates to
///  Param  - a ParameterIn; always ends the intraprocedural walk
enum class Role : std::uint8_t { Use, Output, Value, Param };
std::string_view to_string(Role r);

enum class ResultKind : std::uint8_t { Complete, Partial };

struct PathElement {
  NodeId node = 0;
  bool resolved = true;
  friend auto operator<=>(const PathElement&, const PathElement&) = default;
};

/// Work item: walk back from `start` and prepend to `path` (start-exclusive,
/// last element nearest the sink). `callStack` holds the call sites entered
/// while descending into callee bodies, innermost last.
struct Task {
  NodeId start = 0;
  Role role = Role::Use;
  std::vector<PathElement> path;
  int depth = 0;
  std::vector<NodeId> callStack;
  friend auto operator<=>(const Task&, const Task&) = default;
};

/// A path from its head (nearest the source) to a sink.
struct TaintResult {
  std::vector<PathElement> path;
  int depth = 0;
  ResultKind kind = ResultKind::Partial;
  Role headRole = Role::Use;
  std::vector<NodeId> callStack;
  friend auto operator<=>(const TaintResult&, const TaintResult&) = default;
};

struct TaintQuery {
  std::set<NodeId> sources;
  std::set<NodeId> sinks;
  SemanticsRegistry registry = SemanticsRegistry::with_defaults();
  int maxCallDepth = 5;
  unsigned jobs = 0;  // 0: hardware concurrency
};

class QueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flow {
  std::vector<NodeId> nodes;  // source first
  NodeId source() const { return nodes.front(); }
  NodeId sink() const { return nodes.back(); }
  friend bool operator==(const Flow&, const Flow&) = default;
};

struct QueryStats {
  std::size_t tasks = 0;
  double elapsedMs = 0;
};

struct FlowReport {
  std::vector<Flow> flows;  // unique, ordered by (sink, source, length, nodes)
  QueryStats stats;
};

/// Cache of solved walks. An entry holds every node-simple walk from a start
/// node in a given role, computed without regard to the caller's path, so it
/// can be reused by any task that filters out walks meeting its own path.
class ResultTable {
 public:
  struct Segment {
    std::vector<PathElement> elements;  // head ... start
    ResultKind kind = ResultKind::Partial;
    Role headRole = Role::Use;
  };
  using Key = std::tuple<NodeId, Role, bool>;
  using Entry = std::shared_ptr<const std::vector<Segment>>;

  Entry find(const Key& key) const;
  /// Stores `value` unless another writer got there first; returns the stored entry.
  Entry insert(const Key& key, Entry value);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<Key, Entry> entries_;
};

/// Immutable per-query context shared by all workers, plus the result table.
class QueryContext {
 public:
  QueryContext(const Cpg& cpg, const TaintQuery& query);

  const Cpg& cpg() const { return cpg_; }
  const TaintQuery& query() const { return query_; }
  const CallSemantics& semantics() const { return semantics_; }
  ResultTable& table() { return table_; }

  Role sink_role(NodeId n) const;

  /// Walks back from the task's start node, reusing cached walks.
  std::vector<TaintResult> solve_task(const Task& task);

  /// Results for the valid data parents of `s` (reached in `role`) with `p`
  /// as the already-known suffix. Does not consult the result table.
  std::vector<TaintResult> compute_results_for_parents(NodeId s, Role role, const std::vector<PathElement>& p,
                                                       int depth) const;

  /// Interprocedural continuation of a partial result.
  std::vector<Task> create_tasks_from_result(const TaintResult& result) const;

 private:
  struct MethodInfo {
    NodeId methodReturn = 0;
    std::map<int, NodeId> parameterOut;
    std::vector<NodeId> returns;
    std::vector<NodeId> callSites;  // CALL in-edges plus calls whose receiver refers to the method
  };

  std::vector<ResultTable::Segment> walk(NodeId start, Role role, bool canDefer,
                                         const std::vector<PathElement>& blocked) const;
  std::vector<std::pair<NodeId, Role>> parents(NodeId n, Role role) const;
  std::optional<NodeId> internal_callee(NodeId call) const;
  std::optional<NodeId> referenced_method(NodeId n) const;
  bool defers(NodeId n, Role role) const;
  Role input_role(NodeId n) const;
  Role def_role(NodeId n) const;
  bool targets(NodeId call, NodeId method) const;

  const Cpg& cpg_;
  const TaintQuery& query_;
  CallSemantics semantics_;
  std::map<NodeId, MethodInfo> methods_;
  ResultTable table_;
};

/// Unique by (node sequence, kind); sorted.
std::vector<TaintResult> deduplicate(std::vector<TaintResult> results);

/// Runs the query on a pool of `query.jobs` workers. Throws QueryError when
/// maxCallDepth < 1.
FlowReport run_query(const Cpg& cpg, const TaintQuery& query);

}  // namespace ddflow
