#include "ddflow/frontend.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "ddflow/ddg.hpp"
#include "ddflow/operators.hpp"

namespace ddflow {

namespace {

using minilang::Expr;
using minilang::ExprKind;
using minilang::Stmt;
using minilang::StmtKind;

std::string last_segment(const std::string& dotted) {
  auto dot = dotted.rfind('.');
  return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

std::string join_params(const std::vector<std::string>& params) {
  std::string out;
  for (std::size_t i = 0; i < params.size(); ++i) out += (i ? ", " : "") + params[i];
  return out;
}

class Lowering {
 public:
  Lowering(Cpg& cpg, const minilang::Program& prog) : cpg_(cpg), prog_(prog) {}

  void run() {
    for (const auto& e : prog_.externs) {
      bool dotted = e.name.find('.') != std::string::npos;
      stubs_[e.name] = make_stub(e.name, e.params, dotted, e.pos.line);
      declared_.push_back(e.name);
    }
    std::vector<NodeId> ids;
    for (const auto& f : prog_.functions) ids.push_back(declare_function(f));
    for (std::size_t i = 0; i < prog_.functions.size(); ++i) lower_function(prog_.functions[i], ids[i]);
  }

 private:
  NodeId add(NodeKind kind, std::string code, std::string name, int line, int argIndex = -1) {
    CpgNode n;
    n.kind = kind;
    n.code = std::move(code);
    n.name = std::move(name);
    n.lineNumber = line;
    n.argumentIndex = argIndex;
    n.methodId = method_;
    return cpg_.add_node(std::move(n));
  }

  NodeId add_method_like(NodeKind kind, const std::string& fullName, std::string code, int line) {
    CpgNode n;
    n.kind = kind;
    n.fullName = fullName;
    n.name = last_segment(fullName);
    n.code = std::move(code);
    n.lineNumber = line;
    NodeId id = cpg_.add_node(std::move(n));
    cpg_.set_method_id(id, id);
    return id;
  }

  void add_params(NodeId owner, const std::vector<std::string>& params, int firstIndex, int line) {
    const NodeId saved = method_;
    method_ = owner;
    std::vector<std::pair<std::string, int>> indexed;
    if (firstIndex == 0) indexed.emplace_back("this", 0);
    for (std::size_t i = 0; i < params.size(); ++i) indexed.emplace_back(params[i], static_cast<int>(i) + 1);
    for (const auto& [name, index] : indexed)
      cpg_.add_edge(owner, add(NodeKind::ParameterIn, name, name, line, index), EdgeKind::AST);
    for (const auto& [name, index] : indexed)
      cpg_.add_edge(owner, add(NodeKind::ParameterOut, name, name, line, index), EdgeKind::AST);
    NodeId ret = add(NodeKind::MethodReturn, "RET", "", line);
    cpg_.add_edge(owner, ret, EdgeKind::AST);
    method_ = saved;
  }

  NodeId make_stub(const std::string& fullName, const std::vector<std::string>& params, bool receiver, int line) {
    NodeId stub = add_method_like(NodeKind::ExternalMethodStub, fullName,
                                  "extern " + fullName + "(" + join_params(params) + ")", line);
    add_params(stub, params, receiver ? 0 : 1, line);
    return stub;
  }

  NodeId stub_for(const std::string& fullName) {
    auto it = stubs_.find(fullName);
    if (it != stubs_.end()) return it->second;
    NodeId stub = make_stub(fullName, {}, false, 0);
    stubs_[fullName] = stub;
    return stub;
  }

  NodeId declare_function(const minilang::Function& f) {
    NodeId m = add_method_like(NodeKind::Method, f.name, "fn " + f.name + "(" + join_params(f.params) + ")",
                               f.pos.line);
    add_params(m, f.params, 1, f.pos.line);
    functions_[f.name] = m;
    return m;
  }

  void lower_function(const minilang::Function& f, NodeId m) {
    method_ = m;
    exit_ = 0;
    for (NodeId child : cpg_.out_neighbors(m, EdgeKind::AST))
      if (cpg_.node(child).kind == NodeKind::MethodReturn) exit_ = child;
    NodeId block = add(NodeKind::Block, "{ }", "", f.pos.line);
    cpg_.add_edge(m, block, EdgeKind::AST);
    auto frontier = statements(f.body, block, {m});
    connect(frontier, exit_);
    method_ = 0;
  }

  void connect(const std::vector<NodeId>& preds, NodeId to) {
    for (NodeId p : preds) cpg_.add_edge(p, to, EdgeKind::CFG);
  }

  std::vector<NodeId> statements(const std::vector<Stmt>& body, NodeId parent, std::vector<NodeId> preds) {
    for (const auto& s : body) preds = statement(s, parent, std::move(preds));
    return preds;
  }

  std::vector<NodeId> statement(const Stmt& s, NodeId parent, std::vector<NodeId> preds) {
    const int line = s.pos.line;
    switch (s.kind) {
      case StmtKind::Assign: {
        std::string code = minilang::print(*s.target) + " = " + minilang::print(*s.expr);
        NodeId call = add(NodeKind::Call, code, std::string(kOpAssignment), line);
        cpg_.add_edge(call, expr(*s.target, -1), EdgeKind::AST);
        cpg_.add_edge(call, expr(*s.expr, -1), EdgeKind::AST);
        cpg_.add_edge(parent, call, EdgeKind::AST);
        connect(preds, call);
        return {call};
      }
      case StmtKind::ExprStmt: {
        NodeId root = expr(*s.expr, -1);
        cpg_.add_edge(parent, root, EdgeKind::AST);
        connect(preds, root);
        return {root};
      }
      case StmtKind::Return: {
        std::string code = "return";
        if (s.expr) code += " " + minilang::print(*s.expr);
        NodeId ret = add(NodeKind::Return, code, "return", line);
        if (s.expr) cpg_.add_edge(ret, expr(*s.expr, -1), EdgeKind::AST);
        cpg_.add_edge(parent, ret, EdgeKind::AST);
        connect(preds, ret);
        cpg_.add_edge(ret, exit_, EdgeKind::CFG);
        return {};
      }
      case StmtKind::If:
      case StmtKind::While: {
        const bool loop = s.kind == StmtKind::While;
        const char* word = loop ? "while" : "if";
        NodeId cs = add(NodeKind::ControlStructure, std::string(word) + " (" + minilang::print(*s.expr) + ")", word,
                        line);
        cpg_.add_edge(parent, cs, EdgeKind::AST);
        NodeId cond = expr(*s.expr, -1);
        cpg_.add_edge(cs, cond, EdgeKind::AST);
        connect(preds, cond);
        NodeId thenBlock = add(NodeKind::Block, "{ }", "", line);
        cpg_.add_edge(cs, thenBlock, EdgeKind::AST);
        auto thenExit = statements(s.body, thenBlock, {cond});
        if (loop) {
          connect(thenExit, cond);
          return {cond};
        }
        std::vector<NodeId> out = thenExit;
        if (s.hasElse) {
          NodeId elseBlock = add(NodeKind::Block, "{ }", "", line);
          cpg_.add_edge(cs, elseBlock, EdgeKind::AST);
          auto elseExit = statements(s.elseBody, elseBlock, {cond});
          out.insert(out.end(), elseExit.begin(), elseExit.end());
        } else {
          out.push_back(cond);
        }
        return out;
      }
    }
    return preds;
  }

  NodeId resolve_call(const std::string& dotted) {
    if (auto it = functions_.find(dotted); it != functions_.end()) return it->second;
    return stub_for(dotted);
  }

  NodeId resolve_method(const std::string& method) {
    for (const auto& name : declared_)
      if (name.find('.') != std::string::npos && last_segment(name) == method) return stubs_.at(name);
    return stub_for("<unknown>." + method);
  }

  void argument(NodeId call, const Expr& e, int index) {
    NodeId child = expr(e, index);
    cpg_.add_edge(call, child, EdgeKind::AST);
    cpg_.add_edge(call, child, EdgeKind::ARGUMENT);
  }

  NodeId expr(const Expr& e, int argIndex) {
    const int line = e.pos.line;
    switch (e.kind) {
      case ExprKind::Identifier:
        return add(NodeKind::Identifier, e.text, e.text, line, argIndex);
      case ExprKind::Literal:
        return add(NodeKind::Literal, e.text, "", line, argIndex);
      case ExprKind::New:
        return add(NodeKind::Literal, "new()", "new", line, argIndex);
      case ExprKind::Call: {
        NodeId callee = resolve_call(e.text);
        NodeId call = add(NodeKind::Call, minilang::print(e), last_segment(e.text), line, argIndex);
        for (std::size_t i = 0; i < e.children.size(); ++i) argument(call, e.children[i], static_cast<int>(i) + 1);
        cpg_.add_edge(call, callee, EdgeKind::CALL);
        return call;
      }
      case ExprKind::MethodCall: {
        NodeId callee = resolve_method(e.text);
        NodeId call = add(NodeKind::Call, minilang::print(e), e.text, line, argIndex);
        for (std::size_t i = 0; i < e.children.size(); ++i) argument(call, e.children[i], static_cast<int>(i));
        cpg_.add_edge(call, callee, EdgeKind::CALL);
        return call;
      }
      case ExprKind::Binary:
      case ExprKind::Index:
      case ExprKind::Field: {
        std::string_view op = e.kind == ExprKind::Binary  ? kOpBinary
                              : e.kind == ExprKind::Index ? kOpIndexAccess
                                                          : kOpFieldAccess;
        NodeId call = add(NodeKind::Call, minilang::print(e), std::string(op), line, argIndex);
        for (const auto& c : e.children) cpg_.add_edge(call, expr(c, -1), EdgeKind::AST);
        if (e.kind == ExprKind::Field)
          cpg_.add_edge(call, add(NodeKind::Literal, e.text, e.text, line), EdgeKind::AST);
        return call;
      }
    }
    return 0;
  }

  Cpg& cpg_;
  const minilang::Program& prog_;
  std::map<std::string, NodeId> functions_;
  std::map<std::string, NodeId> stubs_;
  std::vector<std::string> declared_;
  NodeId method_ = 0;
  NodeId exit_ = 0;
};

}  // namespace

Cpg build_ast_cfg(const minilang::Program& program) {
  Cpg cpg;
  Lowering(cpg, program).run();
  return cpg;
}

void lower_operators(Cpg& cpg) {
  const auto count = static_cast<NodeId>(cpg.node_count());
  for (NodeId id = 1; id <= count; ++id) {
    if (cpg.node(id).kind != NodeKind::Call || !is_operator_name(cpg.node(id).name)) continue;
    if (!cpg.out_neighbors(id, EdgeKind::CALL).empty()) continue;
    const std::string op = cpg.node(id).name;
    NodeId stub;
    if (auto existing = cpg.method_by_name(op)) {
      stub = *existing;
    } else {
      CpgNode s;
      s.kind = NodeKind::ExternalMethodStub;
      s.fullName = op;
      s.name = op;
      s.code = op;
      stub = cpg.add_node(std::move(s));
      cpg.set_method_id(stub, stub);
    }
    cpg.add_edge(id, stub, EdgeKind::CALL);
    std::vector<NodeId> operands(cpg.out_neighbors(id, EdgeKind::AST).begin(),
                                 cpg.out_neighbors(id, EdgeKind::AST).end());
    for (std::size_t i = 0; i < operands.size(); ++i) {
      cpg.set_argument_index(operands[i], static_cast<int>(i) + 1);
      cpg.add_edge(id, operands[i], EdgeKind::ARGUMENT);
    }
  }
}

std::vector<NodeId> methods(const Cpg& cpg) {
  std::vector<NodeId> out;
  for (const auto& n : cpg.nodes())
    if (n.kind == NodeKind::Method) out.push_back(n.id);
  return out;
}

std::vector<NodeId> cfg_nodes(const Cpg& cpg, NodeId method) {
  std::vector<NodeId> out;
  for (const auto& n : cpg.nodes()) {
    if (n.methodId != method && n.id != method) continue;
    bool inCfg = n.id == method || n.kind == NodeKind::MethodReturn ||
                 !cpg.out_neighbors(n.id, EdgeKind::CFG).empty() || !cpg.in_neighbors(n.id, EdgeKind::CFG).empty();
    if (inCfg) out.push_back(n.id);
  }
  return out;
}

namespace {

NodeId method_exit(const Cpg& cpg, NodeId method) {
  for (NodeId child : cpg.out_neighbors(method, EdgeKind::AST))
    if (cpg.node(child).kind == NodeKind::MethodReturn) return child;
  throw CpgError("method " + std::to_string(method) + " has no MethodReturn node");
}

}  // namespace

std::map<NodeId, NodeId> immediate_post_dominators(const Cpg& cpg, NodeId method) {
  const NodeId exit = method_exit(cpg, method);
  const auto nodes = cfg_nodes(cpg, method);
  const std::set<NodeId> members(nodes.begin(), nodes.end());

  // Post-order of the reverse CFG, rooted at the exit.
  std::map<NodeId, int> order;
  std::vector<NodeId> postorder;
  std::vector<std::pair<NodeId, std::size_t>> stack{{exit, 0}};
  std::set<NodeId> seen{exit};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    auto preds = cpg.in_neighbors(node, EdgeKind::CFG);
    if (next < preds.size()) {
      NodeId p = preds[next++];
      if (members.contains(p) && seen.insert(p).second) stack.emplace_back(p, 0);
      continue;
    }
    order[node] = static_cast<int>(postorder.size());
    postorder.push_back(node);
    stack.pop_back();
  }
  for (NodeId n : nodes)
    if (!seen.contains(n))
      throw CpgError("CFG node " + std::to_string(n) + " cannot reach the exit of method " + std::to_string(method));

  std::map<NodeId, NodeId> ipdom{{exit, exit}};
  auto intersect = [&](NodeId a, NodeId b) {
    while (a != b) {
      while (order.at(a) < order.at(b)) a = ipdom.at(a);
      while (order.at(b) < order.at(a)) b = ipdom.at(b);
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = postorder.rbegin(); it != postorder.rend(); ++it) {
      NodeId n = *it;
      if (n == exit) continue;
      NodeId candidate = 0;
      for (NodeId succ : cpg.out_neighbors(n, EdgeKind::CFG)) {
        if (!members.contains(succ) || !ipdom.contains(succ)) continue;
        candidate = candidate == 0 ? succ : intersect(candidate, succ);
      }
      if (candidate != 0 && (!ipdom.contains(n) || ipdom[n] != candidate)) {
        ipdom[n] = candidate;
        changed = true;
      }
    }
  }
  return ipdom;
}

void build_cdg(Cpg& cpg, NodeId method) {
  if (cpg.node(method).kind != NodeKind::Method) throw CpgError("build_cdg expects a Method node");
  if (cpg.out_neighbors(method, EdgeKind::CFG).empty()) throw CpgError("method has no CFG layer");
  const auto ipdom = immediate_post_dominators(cpg, method);
  for (const auto& [a, aIpdom] : ipdom) {
    for (NodeId b : cpg.out_neighbors(a, EdgeKind::CFG)) {
      NodeId runner = b;
      while (runner != aIpdom) {
        cpg.add_edge(a, runner, EdgeKind::CDG);
        NodeId up = ipdom.at(runner);
        if (up == runner) break;
        runner = up;
      }
    }
  }
}

Cpg compile(const minilang::Program& program) {
  Cpg cpg = build_ast_cfg(program);
  lower_operators(cpg);
  for (NodeId m : methods(cpg)) {
    build_cdg(cpg, m);
    build_ddg(cpg, m);
  }
  return cpg;
}

}  // namespace ddflow
