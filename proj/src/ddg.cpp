#include "ddflow/ddg.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "ddflow/frontend.hpp"
#include "ddflow/operators.hpp"

namespace ddflow {

namespace {

using DefSet = std::set<DefUseFact>;

struct PendingEdge {
  NodeId src;
  NodeId dst;
  std::string label;
};

class Transfer {
 public:
  Transfer(const Cpg& cpg, NodeId method) : cpg_(cpg), method_(method) {
    for (NodeId child : cpg.out_neighbors(method, EdgeKind::AST)) {
      const auto& n = cpg.node(child);
      if (n.kind == NodeKind::ParameterIn) params_.push_back(child);
      if (n.kind == NodeKind::ParameterOut) outs_.push_back(child);
      if (n.kind == NodeKind::MethodReturn) exit_ = child;
    }
  }

  NodeId exit() const { return exit_; }

  /// Applies the effect of CFG node `n` to `state`. Edges are recorded only
  /// when `edges` is non-null.
  void apply(NodeId n, DefSet& state, std::vector<PendingEdge>* edges) const {
    const auto& node = cpg_.node(n);
    switch (node.kind) {
      case NodeKind::Method:
        for (NodeId p : params_) state.insert({cpg_.node(p).name, p, DefKind::ParameterIn});
        return;
      case NodeKind::MethodReturn:
        if (!edges) return;
        for (NodeId out : outs_) {
          const auto& name = cpg_.node(out).name;
          for (const auto& def : state)
            if (def.variable == name) edges->push_back({def.node, out, name});
        }
        return;
      case NodeKind::Return:
        for (NodeId child : cpg_.out_neighbors(n, EdgeKind::AST)) {
          eval(child, state, edges);
          if (edges) edges->push_back({child, n, cpg_.node(child).code});
        }
        if (edges) edges->push_back({n, exit_, node.code});
        return;
      default:
        eval(n, state, edges);
        return;
    }
  }

 private:
  bool is_strong_target(const CpgNode& call, const CpgNode& child) const {
    return call.name == kOpAssignment && child.argumentIndex == 1 && child.kind == NodeKind::Identifier;
  }

  void eval(NodeId n, DefSet& state, std::vector<PendingEdge>* edges) const {
    const auto& node = cpg_.node(n);
    if (node.kind == NodeKind::Identifier) {
      if (!edges) return;
      for (const auto& def : state)
        if (def.variable == node.name) edges->push_back({def.node, n, node.name});
      return;
    }
    if (node.kind != NodeKind::Call) return;

    for (NodeId child : cpg_.out_neighbors(n, EdgeKind::AST))
      if (!is_strong_target(node, cpg_.node(child))) eval(child, state, edges);

    std::optional<NodeId> target;
    for (NodeId arg : cpg_.out_neighbors(n, EdgeKind::ARGUMENT)) {
      const auto& a = cpg_.node(arg);
      if (is_strong_target(node, a)) {
        target = arg;
        continue;
      }
      if (edges) edges->push_back({arg, n, a.code});
      if (a.kind == NodeKind::Identifier) state.insert({a.name, arg, DefKind::CallArgument});
    }
    // The store happens after its operands are evaluated.
    if (target) {
      const auto& name = cpg_.node(*target).name;
      std::erase_if(state, [&](const DefUseFact& d) { return d.variable == name; });
      state.insert({name, *target, DefKind::AssignmentTarget});
    }
  }

  const Cpg& cpg_;
  NodeId method_;
  NodeId exit_ = 0;
  std::vector<NodeId> params_;
  std::vector<NodeId> outs_;
};

std::vector<NodeId> evaluation_order(const Cpg& cpg, NodeId method) {
  const auto nodes = cfg_nodes(cpg, method);
  const std::set<NodeId> members(nodes.begin(), nodes.end());
  std::vector<NodeId> post;
  std::set<NodeId> seen{method};
  std::vector<std::pair<NodeId, std::size_t>> stack{{method, 0}};
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    auto succ = cpg.out_neighbors(n, EdgeKind::CFG);
    if (next < succ.size()) {
      NodeId s = succ[next++];
      if (members.contains(s) && seen.insert(s).second) stack.emplace_back(s, 0);
      continue;
    }
    post.push_back(n);
    stack.pop_back();
  }
  std::vector<NodeId> order(post.rbegin(), post.rend());
  // Nodes unreachable from the entry (dead code after a return) still get
  // their uses evaluated, with nothing reaching them.
  for (NodeId n : nodes)
    if (!seen.contains(n)) order.push_back(n);
  return order;
}

struct Fixpoint {
  std::vector<NodeId> order;
  std::map<NodeId, DefSet> in;
};

Fixpoint solve(const Cpg& cpg, NodeId method, const Transfer& transfer) {
  if (cpg.node(method).kind != NodeKind::Method) throw CpgError("DDG construction expects a Method node");
  if (cpg.out_neighbors(method, EdgeKind::CFG).empty())
    throw CpgError("method '" + cpg.node(method).fullName + "' has no CFG layer");
  Fixpoint fp{evaluation_order(cpg, method), {}};
  const std::set<NodeId> members(fp.order.begin(), fp.order.end());
  std::map<NodeId, DefSet> out;
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId n : fp.order) {
      DefSet state;
      for (NodeId p : cpg.in_neighbors(n, EdgeKind::CFG))
        if (members.contains(p)) state.insert(out[p].begin(), out[p].end());
      fp.in[n] = state;
      transfer.apply(n, state, nullptr);
      if (state != out[n]) {
        out[n] = std::move(state);
        changed = true;
      }
    }
  }
  return fp;
}

}  // namespace

void build_ddg(Cpg& cpg, NodeId method) {
  const Transfer transfer(cpg, method);
  auto fp = solve(cpg, method, transfer);
  std::vector<PendingEdge> edges;
  for (NodeId n : fp.order) {
    DefSet state = fp.in[n];
    transfer.apply(n, state, &edges);
  }
  for (auto& e : edges) cpg.add_edge(e.src, e.dst, EdgeKind::DDG, std::move(e.label));
}

std::vector<std::pair<NodeId, std::vector<DefUseFact>>> reaching_definitions(const Cpg& cpg, NodeId method) {
  const Transfer transfer(cpg, method);
  auto fp = solve(cpg, method, transfer);
  std::vector<std::pair<NodeId, std::vector<DefUseFact>>> result;
  for (auto& [n, defs] : fp.in) result.emplace_back(n, std::vector<DefUseFact>(defs.begin(), defs.end()));
  return result;
}

}  // namespace ddflow
