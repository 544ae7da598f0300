#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>

namespace ddflow::testing {

namespace {

enum class R { Use, Out, Val, Par };

class PathOracle {
 public:
  PathOracle(const Cpg& g, const SemanticsRegistry& reg, const std::set<NodeId>& sources, int k)
      : g_(g), reg_(reg), sources_(sources), k_(k) {}

  void from_sink(NodeId sink) {
    const auto kind = g_.node(sink).kind;
    R role = kind == NodeKind::ParameterIn ? R::Par : kind == NodeKind::Call ? R::Val : R::Use;
    std::vector<NodeId> path;
    explore(sink, role, 0, {}, path);
  }

  std::set<std::vector<NodeId>> flows;

 private:
  using Pairs = std::set<std::pair<int, int>>;

  NodeId owner(NodeId n) const {
    auto in = g_.in_neighbors(n, EdgeKind::ARGUMENT);
    return in.empty() ? 0 : in.front();
  }
  int idx(NodeId n) const { return g_.node(n).argumentIndex; }
  NodeId callee(NodeId call) const {
    auto out = g_.out_neighbors(call, EdgeKind::CALL);
    return out.empty() ? 0 : out.front();
  }
  std::string callee_name(NodeId call) const {
    NodeId c = callee(call);
    return c ? g_.node(c).fullName : std::string();
  }
  bool is_method(NodeId m) const { return m != 0 && g_.node(m).kind == NodeKind::Method; }

  NodeId member(NodeId method, NodeKind kind, std::optional<int> index = std::nullopt) const {
    for (const auto& n : g_.nodes())
      if (n.methodId == method && n.id != method && n.kind == kind && (!index || n.argumentIndex == *index))
        return n.id;
    return 0;
  }

  NodeId arg(NodeId call, int index) const {
    for (NodeId a : g_.out_neighbors(call, EdgeKind::ARGUMENT))
      if (idx(a) == index) return a;
    return 0;
  }

  const std::optional<Pairs>& sem(NodeId call) {
    auto it = semCache_.find(call);
    if (it != semCache_.end()) return it->second;
    std::optional<Pairs> result;
    NodeId c = callee(call);
    const FlowSemantic* rule = (c && !is_method(c)) ? reg_.lookup(g_.node(c).fullName) : nullptr;
    if (rule) {
      Pairs pairs;
      std::vector<int> site;
      for (NodeId a : g_.out_neighbors(call, EdgeKind::ARGUMENT)) site.push_back(idx(a));
      auto resolve = [&](const ArgSpec& s) -> std::optional<int> {
        if (!s.named()) return s.index;
        for (const auto& n : g_.nodes())
          if (n.methodId == c && n.kind == NodeKind::ParameterIn && n.name == s.name) return n.argumentIndex;
        return std::nullopt;
      };
      for (const auto& m : rule->mappings) {
        auto s = resolve(m.src), d = resolve(m.dst);
        if (s && d && *s != -1) pairs.insert({*s, *d});
      }
      if (rule->passthrough) {
        for (int i : site) pairs.insert({i, i});
        if (std::count(site.begin(), site.end(), 1)) pairs.insert({1, -1});
      }
      if (rule->taintAll)
        for (int i : site) {
          pairs.insert({i, -1});
          for (int j : site) pairs.insert({i, j});
        }
      result = std::move(pairs);
    }
    return semCache_.emplace(call, std::move(result)).first->second;
  }

  bool valid(NodeId child, NodeId parent) {
    if (g_.node(parent).kind == NodeKind::Call) {
      const auto& s = sem(parent);
      if (s && std::none_of(s->begin(), s->end(), [](auto p) { return p.second == -1; })) return false;
    }
    if (g_.node(child).kind == NodeKind::Call && owner(parent) == child) {
      const auto& s = sem(child);
      return !s || s->contains({idx(parent), -1});
    }
    NodeId oc = owner(child), op = owner(parent);
    if (!oc || !op) return true;
    const auto& s = sem(oc);
    if (!s) return true;
    if (oc == op) return s->contains({idx(parent), idx(child)});
    return std::any_of(s->begin(), s->end(), [&](auto p) { return p.first == idx(child); });
  }

  R input(NodeId n) const { return g_.node(n).kind == NodeKind::Call ? R::Val : R::Use; }
  R def(NodeId n) const {
    auto k = g_.node(n).kind;
    if (k == NodeKind::ParameterIn) return R::Par;
    if (k == NodeKind::Call) return R::Val;
    return owner(n) ? R::Out : R::Use;
  }

  std::vector<std::pair<NodeId, R>> parents(NodeId n, R role) const {
    std::vector<std::pair<NodeId, R>> out;
    if (role == R::Use || role == R::Val) {
      for (NodeId p : g_.in_neighbors(n, EdgeKind::DDG)) out.emplace_back(p, owner(p) == n ? input(p) : def(p));
    } else if (role == R::Out) {
      NodeId o = owner(n);
      for (NodeId s : g_.out_neighbors(o, EdgeKind::ARGUMENT))
        if (s != n) out.emplace_back(s, input(s));
      for (NodeId p : g_.in_neighbors(n, EdgeKind::DDG)) out.emplace_back(p, def(p));
      const auto access = callee_name(o);
      if (idx(n) == 1 && (access == "<op.indexAccess>" || access == "<op.fieldAccess>") && idx(o) == 1) {
        NodeId a = owner(o);
        if (a && callee_name(a) == "<op.assignment>")
          if (NodeId src = arg(a, 2)) out.emplace_back(src, input(src));
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  NodeId ref_target(NodeId n) const {
    for (NodeId m : g_.out_neighbors(n, EdgeKind::REF))
      if (is_method(m)) return m;
    return 0;
  }

  bool site_targets(NodeId call, NodeId method) const {
    if (callee(call) == method) return true;
    NodeId recv = arg(call, 0);
    return recv && g_.has_edge(recv, method, EdgeKind::REF);
  }

  std::vector<NodeId> sites_of(NodeId method) const {
    std::set<NodeId> out(g_.in_neighbors(method, EdgeKind::CALL).begin(),
                         g_.in_neighbors(method, EdgeKind::CALL).end());
    for (NodeId r : g_.in_neighbors(method, EdgeKind::REF))
      if (owner(r) && idx(r) == 0) out.insert(owner(r));
    return {out.begin(), out.end()};
  }

  void explore(NodeId n, R role, int depth, std::vector<NodeId> stack, std::vector<NodeId>& path) {
    if (std::find(path.begin(), path.end(), n) != path.end()) return;
    path.push_back(n);
    if (sources_.contains(n)) flows.insert(std::vector<NodeId>(path.rbegin(), path.rend()));
    const bool canDescend = depth + 1 < k_;

    if (role == R::Par) {
      const NodeId m = g_.node(n).methodId;
      if (!stack.empty() && site_targets(stack.back(), m)) {
        NodeId a = arg(stack.back(), idx(n));
        auto rest = stack;
        rest.pop_back();
        if (a) explore(a, input(a), depth - 1, rest, path);
      } else if (canDescend) {
        for (NodeId site : sites_of(m))
          if (NodeId a = arg(site, idx(n))) explore(a, input(a), depth + 1, {}, path);
      }
      path.pop_back();
      return;
    }

    if (canDescend) {
      if (NodeId m = ref_target(n)) {
        for (const auto& x : g_.nodes())
          if (x.methodId == m && x.kind == NodeKind::Return) explore(x.id, R::Use, depth + 1, stack, path);
        path.pop_back();
        return;
      }
      if (role == R::Val && is_method(callee(n))) {
        if (NodeId ret = member(callee(n), NodeKind::MethodReturn)) {
          auto deeper = stack;
          deeper.push_back(n);
          explore(ret, R::Use, depth + 1, deeper, path);
          path.pop_back();
          return;
        }
      }
      if (role == R::Out && is_method(callee(owner(n)))) {
        if (NodeId po = member(callee(owner(n)), NodeKind::ParameterOut, idx(n))) {
          auto deeper = stack;
          deeper.push_back(owner(n));
          explore(po, R::Use, depth + 1, deeper, path);
          path.pop_back();
          return;
        }
      }
    }

    for (auto [p, pr] : parents(n, role))
      if (valid(n, p)) explore(p, pr, depth, stack, path);
    path.pop_back();
  }

  const Cpg& g_;
  const SemanticsRegistry& reg_;
  const std::set<NodeId>& sources_;
  int k_;
  std::map<NodeId, std::optional<Pairs>> semCache_;
};

std::vector<NodeId> method_cfg(const Cpg& g, NodeId method) {
  std::vector<NodeId> out;
  for (const auto& n : g.nodes()) {
    if (n.methodId != method && n.id != method) continue;
    if (n.id == method || n.kind == NodeKind::MethodReturn || !g.out_neighbors(n.id, EdgeKind::CFG).empty() ||
        !g.in_neighbors(n.id, EdgeKind::CFG).empty())
      out.push_back(n.id);
  }
  return out;
}

void subtree(const Cpg& g, NodeId n, std::vector<NodeId>& out) {
  out.push_back(n);
  for (NodeId c : g.out_neighbors(n, EdgeKind::AST)) subtree(g, c, out);
}

}  // namespace

std::set<std::vector<NodeId>> oracle_flows(const Cpg& cpg, const SemanticsRegistry& registry,
                                           const std::set<NodeId>& sources, const std::set<NodeId>& sinks,
                                           int maxCallDepth) {
  PathOracle oracle(cpg, registry, sources, maxCallDepth);
  for (NodeId s : sinks) oracle.from_sink(s);
  return oracle.flows;
}

std::map<NodeId, std::set<std::pair<std::string, NodeId>>> oracle_reaching_defs(const Cpg& g, NodeId method) {
  const auto nodes = method_cfg(g, method);
  const std::set<NodeId> members(nodes.begin(), nodes.end());

  std::map<NodeId, std::set<std::string>> kills;
  std::map<NodeId, std::vector<std::pair<std::string, NodeId>>> gens;
  for (NodeId n : nodes) {
    const auto& node = g.node(n);
    if (n == method) {
      for (const auto& x : g.nodes())
        if (x.methodId == method && x.kind == NodeKind::ParameterIn) gens[n].emplace_back(x.name, x.id);
      continue;
    }
    if (node.kind == NodeKind::MethodReturn) continue;
    std::vector<NodeId> expr;
    if (node.kind == NodeKind::Return) {
      for (NodeId c : g.out_neighbors(n, EdgeKind::AST)) subtree(g, c, expr);
    } else {
      subtree(g, n, expr);
    }
    NodeId target = 0;
    if (node.kind == NodeKind::Call && node.name == "<op.assignment>") {
      for (NodeId a : g.out_neighbors(n, EdgeKind::ARGUMENT))
        if (g.node(a).argumentIndex == 1 && g.node(a).kind == NodeKind::Identifier) target = a;
    }
    if (target) kills[n].insert(g.node(target).name);
    for (NodeId e : expr) {
      const auto& x = g.node(e);
      if (x.kind != NodeKind::Identifier || g.in_neighbors(e, EdgeKind::ARGUMENT).empty()) continue;
      if (e == target || !kills[n].contains(x.name)) gens[n].emplace_back(x.name, e);
    }
  }

  auto reaches = [&](NodeId from, const std::string& var, NodeId to) {
    std::set<NodeId> seen;
    std::deque<NodeId> queue;
    for (NodeId s : g.out_neighbors(from, EdgeKind::CFG))
      if (members.contains(s) && seen.insert(s).second) queue.push_back(s);
    while (!queue.empty()) {
      NodeId s = queue.front();
      queue.pop_front();
      if (s == to) return true;
      if (kills[s].contains(var)) continue;
      for (NodeId t : g.out_neighbors(s, EdgeKind::CFG))
        if (members.contains(t) && seen.insert(t).second) queue.push_back(t);
    }
    return false;
  };

  std::map<NodeId, std::set<std::pair<std::string, NodeId>>> out;
  for (NodeId n : nodes) {
    auto& in = out[n];
    for (const auto& [d, list] : gens)
      for (const auto& [var, defNode] : list)
        if (reaches(d, var, n)) in.emplace(var, defNode);
  }
  return out;
}

std::set<std::pair<NodeId, NodeId>> oracle_cdg(const Cpg& g, NodeId method) {
  const auto nodes = method_cfg(g, method);
  const std::set<NodeId> members(nodes.begin(), nodes.end());
  NodeId exit = 0;
  for (NodeId n : nodes)
    if (g.node(n).kind == NodeKind::MethodReturn) exit = n;

  // a post-dominates b: every path from b to the exit meets a.
  auto pdom = [&](NodeId a, NodeId b) {
    if (a == b) return true;
    std::set<NodeId> seen{b};
    std::deque<NodeId> queue{b};
    while (!queue.empty()) {
      NodeId s = queue.front();
      queue.pop_front();
      if (s == exit) return false;
      for (NodeId t : g.out_neighbors(s, EdgeKind::CFG))
        if (t != a && members.contains(t) && seen.insert(t).second) queue.push_back(t);
    }
    return true;
  };

  std::set<std::pair<NodeId, NodeId>> out;
  for (NodeId x : nodes)
    for (NodeId s : g.out_neighbors(x, EdgeKind::CFG))
      for (NodeId y : nodes)
        if (pdom(y, s) && !(y != x && pdom(y, x))) out.emplace(x, y);
  return out;
}

}  // namespace ddflow::testing
