#include "ddflow/cli.hpp"

#include <cstdio>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ddflow/bench.hpp"
#include "ddflow/engine.hpp"
#include "ddflow/matcher.hpp"
#include "ddflow/pipeline.hpp"
#include "ddflow/report.hpp"

namespace ddflow {

namespace {

struct RunOptions {
  std::vector<std::string> mini;
  std::string cpg;
  std::vector<std::string> sources;
  std::vector<std::string> sinks;
  std::vector<std::string> semantics;
  int depth = 5;
  std::string format = "text";
  unsigned jobs = 0;
  bool noOperators = false;
  bool regex = false;
  bool noTiming = false;
};

struct BenchCliOptions {
  std::string manifest;
  int iterations = 10;
  int depth = 5;
  std::string sweep;
  bool parallelCases = false;
  bool noCaseSemantics = false;
  std::string format = "text";
  unsigned jobs = 1;
};

struct ExportOptions {
  std::vector<std::string> mini;
  bool ddgOnly = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::filesystem::path> paths(const std::vector<std::string>& in) {
  return {in.begin(), in.end()};
}

int do_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  if (o.mini.empty() == o.cpg.empty()) throw UsageError("exactly one of --mini or --cpg is required");
  std::vector<NodeMatcher> sourceMatchers, sinkMatchers;
  try {
    for (const auto& s : o.sources) sourceMatchers.push_back(parse_matcher(s));
    for (const auto& s : o.sinks) sinkMatchers.push_back(parse_matcher(s));
  } catch (const MatcherError& e) {
    throw UsageError(e.what());
  }

  Cpg cpg = o.mini.empty() ? load_cpg_file(o.cpg) : compile_minilang_files(paths(o.mini));
  TaintQuery query;
  query.registry = load_semantics_files(paths(o.semantics), o.regex);
  query.maxCallDepth = o.depth;
  query.jobs = o.jobs;
  auto collect = [&](const std::vector<NodeMatcher>& matchers, const std::vector<std::string>& texts,
                     const char* what, std::set<NodeId>& into) {
    for (std::size_t i = 0; i < matchers.size(); ++i) {
      auto ids = resolve_matcher(cpg, matchers[i], !o.noOperators);
      if (ids.empty()) err << "warning: " << what << " matcher resolved to 0 nodes: " << texts[i] << '\n';
      into.insert(ids.begin(), ids.end());
    }
  };
  collect(sourceMatchers, o.sources, "source", query.sources);
  collect(sinkMatchers, o.sinks, "sink", query.sinks);

  FlowReport report = run_query(cpg, query);
  out << (o.format == "json" ? report_json(cpg, report, !o.noTiming) : report_text(cpg, report, !o.noTiming));
  return kExitOk;
}

std::pair<int, int> parse_range(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      int k = std::stoi(text);
      return {k, k};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError("--sweep-k expects A..B, got '" + text + "'");
  }
}

int do_bench(const BenchCliOptions& o, std::ostream& out) {
  Manifest manifest;
  try {
    manifest = load_manifest(o.manifest);
  } catch (const ManifestError& e) {
    throw InputError(e.what());
  }
  BenchOptions options;
  options.iterations = o.iterations;
  options.depth = o.depth;
  options.caseSemantics = !o.noCaseSemantics;
  options.parallelCases = o.parallelCases;
  options.jobs = o.jobs;

  if (o.sweep.empty()) {
    auto run = run_corpus(manifest, options);
    out << (o.format == "json" ? corpus_json(run) : corpus_text(run));
    return kExitOk;
  }
  auto [from, to] = parse_range(o.sweep);
  if (from > to) throw UsageError("--sweep-k range is empty");
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ostringstream table;
  table << "k    TP   TN   FP   FN   F1     J      ms\n";
  for (int k = from; k <= to; ++k) {
    options.depth = k;
    auto run = run_corpus(manifest, options);
    auto m = compute_metrics(run.matrix);
    char line[160];
    std::snprintf(line, sizeof line, "%-4d %-4ld %-4ld %-4ld %-4ld %-6s %-6s %.2f\n", k, run.matrix.tp, run.matrix.tn,
                  run.matrix.fp, run.matrix.fn, format_metric(m.f1).c_str(), format_metric(m.j).c_str(), run.meanMs);
    table << line;
    rows.push_back({{"k", k},
                    {"tp", run.matrix.tp},
                    {"tn", run.matrix.tn},
                    {"fp", run.matrix.fp},
                    {"fn", run.matrix.fn},
                    {"f1", format_metric(m.f1)},
                    {"j", format_metric(m.j)},
                    {"meanMs", run.meanMs}});
  }
  out << (o.format == "json" ? rows.dump(2) + "\n" : table.str());
  return kExitOk;
}

int do_export(const ExportOptions& o, std::ostream& out) {
  Cpg cpg = compile_minilang_files(paths(o.mini));
  out << (o.ddgOnly ? serialize_ddg_edges(cpg) : serialize_cpg(cpg) + "\n");
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ddflow: backward taint analysis over code property graphs", "ddflow"};
  app.require_subcommand(1);

  RunOptions run;
  auto* runCmd = app.add_subcommand("run", "Run a taint query");
  auto* miniOpt = runCmd->add_option("--mini", run.mini, "MiniLang source files")->check(CLI::ExistingFile);
  auto* cpgOpt = runCmd->add_option("--cpg", run.cpg, "JSON code property graph")->check(CLI::ExistingFile);
  miniOpt->excludes(cpgOpt);
  runCmd->add_option("--sources", run.sources, "Source matcher (repeatable)");
  runCmd->add_option("--sinks", run.sinks, "Sink matcher (repeatable)");
  runCmd->add_option("--semantics", run.semantics, "Semantics file (repeatable, later files win)")
      ->check(CLI::ExistingFile);
  runCmd->add_option("--depth", run.depth, "Maximum call depth k")->check(CLI::PositiveNumber);
  runCmd->add_option("--format", run.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  runCmd->add_option("--jobs", run.jobs, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
  runCmd->add_flag("--no-operators", run.noOperators, "Matchers ignore operator calls");
  runCmd->add_flag("--semantics-regex", run.regex, "Treat semantics names as regular expressions");
  runCmd->add_flag("--no-timing", run.noTiming, "Report elapsed time as 0");

  BenchCliOptions bench;
  auto* benchCmd = app.add_subcommand("bench", "Run a test-case corpus and compute metrics");
  benchCmd->add_option("manifest", bench.manifest, "Corpus manifest (JSON)")->required();
  benchCmd->add_option("--iterations", bench.iterations, "Timed repetitions")->check(CLI::PositiveNumber);
  benchCmd->add_option("--depth", bench.depth, "Maximum call depth k")->check(CLI::PositiveNumber);
  benchCmd->add_option("--sweep-k", bench.sweep, "Rerun for every k in A..B");
  benchCmd->add_flag("--parallel-cases", bench.parallelCases, "Run cases concurrently");
  benchCmd->add_flag("--no-case-semantics", bench.noCaseSemantics, "Ignore per-case semantics files");
  benchCmd->add_option("--format", bench.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  benchCmd->add_option("--jobs", bench.jobs, "Worker threads per query")->check(CLI::PositiveNumber);

  ExportOptions exp;
  auto* exportCmd = app.add_subcommand("export", "Compile MiniLang and print the graph as JSON");
  exportCmd->add_option("--mini", exp.mini, "MiniLang source files")->required()->check(CLI::ExistingFile);
  exportCmd->add_flag("--ddg", exp.ddgOnly, "Print only the sorted DDG edge list");

  std::vector<std::string> argvStore{"ddflow"};
  argvStore.insert(argvStore.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argvStore) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (runCmd->parsed()) return do_run(run, out, err);
    if (benchCmd->parsed()) return do_bench(bench, out);
    return do_export(exp, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const QueryError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const CpgError& e) {
    err << "error: invalid graph: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace ddflow
