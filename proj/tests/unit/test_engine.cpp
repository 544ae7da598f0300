#include <doctest.h>

#include "ddflow/engine.hpp"
#include "ddflow/frontend.hpp"
#include "ddflow/matcher.hpp"
#include "ddflow/pipeline.hpp"
#include "support/generator.hpp"
#include "support/oracles.hpp"

using namespace ddflow;
using namespace ddflow::testing;

namespace {

TaintQuery example_query(const Cpg& g, const std::vector<std::filesystem::path>& semantics) {
  TaintQuery q;
  q.sources = resolve_matchers(g, {"call:Source.getValue"}, true);
  q.sinks = resolve_matchers(g, {"arg:Sink.addValue:1"}, true);
  q.registry = load_semantics_files(semantics);
  q.jobs = 2;
  return q;
}

FlowReport run_chain(int n, int k) {
  auto c = wrapper_chain(n);
  Cpg g = compile_minilang_source(c.program);
  TaintQuery q;
  q.sources = resolve_matchers(g, {kGenSource}, true);
  q.sinks = resolve_matchers(g, {kGenSink}, true);
  q.registry.add_all(parse_semantics(c.semantics).rules);
  q.maxCallDepth = k;
  auto report = run_query(g, q);
  CHECK(flow_set(report) == oracle_flows(g, q.registry, q.sources, q.sinks, k));
  return report;
}

}  // namespace

TEST_CASE("transform semantics decide which flows of the running example survive") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  struct Row {
    std::vector<std::filesystem::path> semantics;
    std::size_t flows;
  };
  const std::vector<Row> rows = {
      {{}, 2},
      {{DDFLOW_FIXTURES "/eg1.sem"}, 1},
      {{DDFLOW_FIXTURES "/eg2.sem"}, 2},
      {{DDFLOW_FIXTURES "/eg2_literal.sem"}, 1},
  };
  for (const auto& row : rows) {
    auto q = example_query(g, row.semantics);
    auto report = run_query(g, q);
    CHECK(report.flows.size() == row.flows);
    CHECK(flow_set(report) == oracle_flows(g, q.registry, q.sources, q.sinks, q.maxCallDepth));
    for (const auto& f : report.flows) {
      CHECK(q.sources.contains(f.source()));
      CHECK(q.sinks.contains(f.sink()));
    }
  }
}

TEST_CASE("the first rule keeps the receiver flow and the literal second rule keeps the argument flow") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  auto sinkOf = [&](const char* sem) {
    auto report = run_query(g, example_query(g, {sem}));
    REQUIRE(report.flows.size() == 1);
    return g.node(report.flows[0].sink()).lineNumber;
  };
  CHECK(sinkOf(DDFLOW_FIXTURES "/eg1.sem") == 16);
  CHECK(sinkOf(DDFLOW_FIXTURES "/eg2_literal.sem") == 17);
}

TEST_CASE("invalid queries are rejected") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  auto q = example_query(g, {});
  q.maxCallDepth = 0;
  CHECK_THROWS_AS(run_query(g, q), QueryError);
  q.maxCallDepth = 5;
  q.sinks.insert(100000);
  CHECK_THROWS_AS(run_query(g, q), QueryError);
}

TEST_CASE("reports do not depend on the worker count") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    auto c = generate_case(rng);
    Cpg g = compile_minilang_source(c.program);
    TaintQuery q;
    q.sources = resolve_matchers(g, {kGenSource}, true);
    q.sinks = resolve_matchers(g, {kGenSink}, true);
    q.registry.add_all(parse_semantics(c.semantics).rules);
    q.jobs = 1;
    auto one = run_query(g, q).flows;
    q.jobs = 8;
    CHECK(run_query(g, q).flows == one);
  }
}

TEST_CASE("deduplicate keeps one result per node sequence and kind") {
  TaintResult a{{{1, true}, {2, true}}, 0, ResultKind::Complete, Role::Use, {}};
  TaintResult b = a;
  b.depth = 3;
  TaintResult c = a;
  c.kind = ResultKind::Partial;
  auto out = deduplicate({a, c, b, a});
  CHECK(out.size() == 2);
  CHECK(std::is_sorted(out.begin(), out.end()));
}

TEST_CASE("parameter heads continue at call sites until the depth bound") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  auto q = example_query(g, {});
  QueryContext ctx(g, q);
  NodeId x = 0;
  for (const auto& n : g.nodes())
    if (n.kind == NodeKind::ParameterIn && n.name == "x") x = n.id;
  REQUIRE(x != 0);
  TaintResult r{{{x, true}}, 0, ResultKind::Partial, Role::Param, {}};
  auto tasks = ctx.create_tasks_from_result(r);
  REQUIRE(tasks.size() == 1);
  CHECK(g.node(tasks[0].start).code == "result");
  CHECK(tasks[0].depth == 1);

  r.depth = q.maxCallDepth - 1;
  CHECK(ctx.create_tasks_from_result(r).empty());

  r.kind = ResultKind::Complete;
  r.depth = 0;
  CHECK(ctx.create_tasks_from_result(r).empty());
}

TEST_CASE("a walk that reaches a parameter stops with a partial result") {
  Cpg g = compile_minilang_files({DDFLOW_FIXTURES "/example.mini"});
  auto q = example_query(g, {});
  QueryContext ctx(g, q);
  NodeId sink = *q.sinks.begin();
  auto results = ctx.solve_task(Task{sink, ctx.sink_role(sink), {}, 0, {}});
  REQUIRE_FALSE(results.empty());
  for (const auto& r : results) {
    CHECK(r.kind == ResultKind::Partial);
    CHECK(r.headRole == Role::Param);
    CHECK(r.path.back().node == sink);
  }
}

TEST_CASE("wrapper chains are sanitized within the depth bound and over-approximated beyond it") {
  for (int n = 1; n <= 7; ++n) {
    INFO("n = " << n);
    CHECK(run_chain(n, 5).flows.empty() == (n < 5));
  }
}
