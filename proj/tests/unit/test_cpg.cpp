#include <doctest.h>

#include "ddflow/cpg.hpp"
#include "ddflow/pipeline.hpp"

using namespace ddflow;

namespace {

std::string ident(int id, const char* kind = "Identifier") {
  return std::string(R"({"id": )") + std::to_string(id) + R"(, "kind": ")" + kind +
         R"(", "code": "x", "name": "x", "fullName": "", "argumentIndex": -1, "line": 1, "methodId": 0})";
}

CpgNode make(NodeKind kind, std::string code, std::string fullName = {}) {
  CpgNode n;
  n.kind = kind;
  n.code = code;
  n.name = code;
  n.fullName = std::move(fullName);
  return n;
}

}  // namespace

TEST_CASE("ids are dense and start at one") {
  Cpg g;
  CHECK(g.add_node(make(NodeKind::Method, "f", "f")) == 1);
  CHECK(g.add_node(make(NodeKind::Identifier, "x")) == 2);
  CHECK(g.node_count() == 2);
  CHECK(g.contains(2));
  CHECK_FALSE(g.contains(0));
  CHECK_FALSE(g.contains(3));
  CHECK_THROWS_AS(g.node(3), CpgError);
}

TEST_CASE("method names are unique and indexed") {
  Cpg g;
  NodeId f = g.add_node(make(NodeKind::Method, "f", "f"));
  CHECK(g.method_by_name("f") == f);
  CHECK_FALSE(g.method_by_name("g"));
  CHECK_THROWS_AS(g.add_node(make(NodeKind::ExternalMethodStub, "f", "f")), CpgError);
  CHECK_THROWS_AS(g.add_node(make(NodeKind::Method, "h")), CpgError);
  CHECK_THROWS_AS(g.add_node(make(NodeKind::Identifier, "x", "x")), CpgError);
}

TEST_CASE("edge kinds constrain their endpoints") {
  Cpg g;
  NodeId m = g.add_node(make(NodeKind::Method, "f", "f"));
  NodeId c = g.add_node(make(NodeKind::Call, "g()"));
  NodeId x = g.add_node(make(NodeKind::Identifier, "x"));
  CHECK_NOTHROW(g.add_edge(c, m, EdgeKind::CALL));
  CHECK_THROWS_AS(g.add_edge(x, m, EdgeKind::CALL), CpgError);
  CHECK_THROWS_AS(g.add_edge(c, x, EdgeKind::CALL), CpgError);
  CHECK_NOTHROW(g.add_edge(c, x, EdgeKind::ARGUMENT));
  CHECK_THROWS_AS(g.add_edge(x, c, EdgeKind::ARGUMENT), CpgError);
  CHECK_THROWS_AS(g.add_edge(x, c, EdgeKind::DDG), CpgError);
  CHECK_THROWS_AS(g.add_edge(x, 99, EdgeKind::AST), CpgError);
}

TEST_CASE("parallel DDG edges keep every label but one adjacency entry") {
  Cpg g;
  NodeId a = g.add_node(make(NodeKind::Identifier, "a"));
  NodeId b = g.add_node(make(NodeKind::Identifier, "b"));
  g.add_edge(a, b, EdgeKind::DDG, "y");
  g.add_edge(a, b, EdgeKind::DDG, "x");
  g.add_edge(a, b, EdgeKind::DDG, "x");
  CHECK(g.ddg_labels(a, b) == std::vector<std::string>{"x", "y"});
  CHECK(g.out_neighbors(a, EdgeKind::DDG).size() == 1);
  CHECK(g.in_neighbors(b, EdgeKind::DDG).size() == 1);
  CHECK(g.edges().size() == 2);
  CHECK(g.has_edge(a, b, EdgeKind::DDG));
  CHECK_FALSE(g.has_edge(b, a, EdgeKind::DDG));
}

TEST_CASE("serialization round-trips a compiled program") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  std::string text = serialize_cpg(g);
  Cpg back = load_cpg(text);
  CHECK(serialize_cpg(back) == text);
  CHECK(serialize_ddg_edges(back) == serialize_ddg_edges(g));
  CHECK(back.method_index() == g.method_index());
}

TEST_CASE("load_cpg rejects malformed documents") {
  auto rejects = [](const std::string& doc, const std::string& needle) {
    try {
      load_cpg(doc);
    } catch (const IngestError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      return;
    }
    FAIL("accepted: " << doc);
  };
  rejects("{", "malformed JSON");
  rejects("[]", "top level");
  rejects(R"({"nodes": [], "edges": {}})", "arrays");
  rejects(R"({"nodes": [)" + ident(2) + R"(], "edges": []})", "dense");
  rejects(R"({"nodes": [)" + ident(1, "Bogus") + R"(], "edges": []})", "unknown kind");
  rejects(R"({"nodes": [{"id": 1, "kind": "Identifier"}], "edges": []})", "missing field");
  rejects(R"({"nodes": [)" + ident(1) + R"(], "edges": [{"src": 1, "dst": 7, "kind": "AST"}]})", "dangling edge");
  rejects(R"({"nodes": [)" + ident(1) + "," + ident(2) +
              R"(], "edges": [{"src": 1, "dst": 2, "kind": "AST", "variable": "x"}]})",
          "only allowed on DDG");
  rejects(R"({"nodes": [)" + ident(1) + "," + ident(2) + R"(], "edges": [{"src": 1, "dst": 2, "kind": "DDG"}]})",
          "missing field");
}
