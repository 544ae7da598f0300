#include <doctest.h>

#include "ddflow/ddg.hpp"
#include "ddflow/frontend.hpp"
#include "ddflow/operators.hpp"
#include "ddflow/pipeline.hpp"

using namespace ddflow;

namespace {

std::vector<NodeId> find(const Cpg& g, NodeKind kind, std::string_view code) {
  std::vector<NodeId> out;
  for (const auto& n : g.nodes())
    if (n.kind == kind && n.code == code) out.push_back(n.id);
  return out;
}

NodeId one(const Cpg& g, NodeKind kind, std::string_view code) {
  auto all = find(g, kind, code);
  REQUIRE(all.size() == 1);
  return all.front();
}

NodeId at_line(const Cpg& g, NodeKind kind, std::string_view code, int line) {
  for (const auto& n : g.nodes())
    if (n.kind == kind && n.code == code && n.lineNumber == line) return n.id;
  FAIL("no " << code << " on line " << line);
  return 0;
}

std::size_t ddg_in_count(const Cpg& g, NodeId n) {
  std::size_t count = 0;
  for (const auto& e : g.edges())
    if (e.kind == EdgeKind::DDG && e.dst == n) ++count;
  return count;
}

}  // namespace

TEST_CASE("calls bind to methods, stubs and operator stubs") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  NodeId bar = *g.method_by_name("bar");
  CHECK(g.node(bar).kind == NodeKind::Method);
  NodeId call = one(g, NodeKind::Call, "bar(result, v)");
  CHECK(g.out_neighbors(call, EdgeKind::CALL)[0] == bar);

  NodeId transform = one(g, NodeKind::Call, "u.transform(v)");
  NodeId stub = g.out_neighbors(transform, EdgeKind::CALL)[0];
  CHECK(g.node(stub).fullName == "Obj.transform");
  auto args = g.out_neighbors(transform, EdgeKind::ARGUMENT);
  REQUIRE(args.size() == 2);
  CHECK(g.node(args[0]).argumentIndex == 0);
  CHECK(g.node(args[0]).code == "u");
  CHECK(g.node(args[1]).argumentIndex == 1);

  NodeId assign = one(g, NodeKind::Call, "u = Source.getValue()");
  CHECK(g.node(g.out_neighbors(assign, EdgeKind::CALL)[0]).fullName == kOpAssignment);
  auto ops = g.out_neighbors(assign, EdgeKind::ARGUMENT);
  REQUIRE(ops.size() == 2);
  CHECK(g.node(ops[0]).argumentIndex == 1);
  CHECK(g.node(ops[1]).argumentIndex == 2);
}

TEST_CASE("undeclared callees get stubs on demand") {
  Cpg g = compile_minilang_source("fn f() { x = Lib.g(1); y = x.h(); }");
  CHECK(g.node(*g.method_by_name("Lib.g")).kind == NodeKind::ExternalMethodStub);
  CHECK(g.method_by_name("<unknown>.h"));
}

TEST_CASE("while loops branch at the condition and loop back") {
  Cpg g = compile_minilang_source("extern S.p(a);\nfn f(c) {\n  while (c) {\n    c = S.p(c);\n  }\n  S.p(c);\n}\n");
  NodeId cond = at_line(g, NodeKind::Identifier, "c", 3);
  CHECK(g.out_neighbors(cond, EdgeKind::CFG).size() == 2);
  NodeId body = one(g, NodeKind::Call, "c = S.p(c)");
  CHECK(g.has_edge(body, cond, EdgeKind::CFG));
  CHECK(g.has_edge(cond, body, EdgeKind::CDG));
  CHECK(g.has_edge(cond, cond, EdgeKind::CDG));
  NodeId after = at_line(g, NodeKind::Call, "S.p(c)", 6);
  CHECK(g.in_neighbors(after, EdgeKind::CDG).empty());
}

TEST_CASE("if statements make both branches control dependent on the condition") {
  Cpg g = compile_minilang_source("fn f(c) {\n  if (c) { a = 1; } else { b = 2; }\n  d = 3;\n}\n");
  NodeId cond = at_line(g, NodeKind::Identifier, "c", 2);
  CHECK(g.has_edge(cond, one(g, NodeKind::Call, "a = 1"), EdgeKind::CDG));
  CHECK(g.has_edge(cond, one(g, NodeKind::Call, "b = 2"), EdgeKind::CDG));
  CHECK(g.in_neighbors(one(g, NodeKind::Call, "d = 3"), EdgeKind::CDG).empty());
}

TEST_CASE("the running example has the expected def-use edges") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  NodeId uDef = find(g, NodeKind::Identifier, "u").at(0);
  NodeId uUse = find(g, NodeKind::Identifier, "u").at(1);
  CHECK(g.ddg_labels(uDef, uUse) == std::vector<std::string>{"u"});

  auto v = find(g, NodeKind::Identifier, "v");
  REQUIRE(v.size() == 3);
  // v = new(); u.transform(v); bar(result, v)
  CHECK(g.has_edge(v[0], v[1], EdgeKind::DDG));
  CHECK(g.has_edge(v[0], v[2], EdgeKind::DDG));
  // the argument to transform is a weak redefinition of v
  CHECK(g.ddg_labels(v[1], v[2]) == std::vector<std::string>{"v"});

  auto result = find(g, NodeKind::Identifier, "result");
  REQUIRE(result.size() == 2);
  CHECK(g.ddg_labels(result[0], result[1]) == std::vector<std::string>{"result"});

  NodeId call = one(g, NodeKind::Call, "u.transform(v)");
  CHECK(g.has_edge(uUse, call, EdgeKind::DDG));
  CHECK(g.has_edge(v[1], call, EdgeKind::DDG));
  CHECK_FALSE(g.has_edge(uUse, v[1], EdgeKind::DDG));
  CHECK_FALSE(g.has_edge(v[1], uUse, EdgeKind::DDG));
}

TEST_CASE("an assignment kills earlier definitions") {
  Cpg g = compile_minilang_source("extern S.p(a);\nfn f() {\n  x = 1;\n  x = 2;\n  S.p(x);\n}\n");
  auto x = find(g, NodeKind::Identifier, "x");
  REQUIRE(x.size() == 3);
  CHECK(ddg_in_count(g, x[2]) == 1);
  CHECK(g.has_edge(x[1], x[2], EdgeKind::DDG));
}

TEST_CASE("the right-hand side is read before the target is written") {
  Cpg g = compile_minilang_source("fn f(p) {\n  p = p;\n}\n");
  NodeId m = *g.method_by_name("f");
  NodeId exit = 0;
  for (const auto& n : g.nodes())
    if (n.kind == NodeKind::MethodReturn && n.methodId == m) exit = n.id;
  for (const auto& [n, defs] : reaching_definitions(g, m)) {
    if (n != exit) continue;
    REQUIRE(defs.size() == 1);
    CHECK(defs[0].kind == DefKind::AssignmentTarget);
  }
}

TEST_CASE("call arguments are weak definitions") {
  Cpg g = compile_minilang_source("extern S.p(a);\nfn f(x) {\n  S.p(x);\n  S.p(x);\n}\n");
  auto x = find(g, NodeKind::Identifier, "x");
  REQUIRE(x.size() == 2);
  NodeId param = one(g, NodeKind::ParameterIn, "x");
  CHECK(g.has_edge(param, x[0], EdgeKind::DDG));
  CHECK(g.has_edge(param, x[1], EdgeKind::DDG));
  CHECK(g.has_edge(x[0], x[1], EdgeKind::DDG));
  NodeId out = one(g, NodeKind::ParameterOut, "x");
  CHECK(g.has_edge(x[1], out, EdgeKind::DDG));
}

TEST_CASE("return values flow into the method return") {
  Cpg g = compile_minilang_source("fn f(a) {\n  return a;\n}\n");
  NodeId ret = one(g, NodeKind::Return, "return a");
  NodeId a = one(g, NodeKind::Identifier, "a");
  CHECK(g.has_edge(a, ret, EdgeKind::DDG));
  NodeId m = *g.method_by_name("f");
  for (const auto& n : g.nodes())
    if (n.kind == NodeKind::MethodReturn && n.methodId == m) CHECK(g.has_edge(ret, n.id, EdgeKind::DDG));
}
