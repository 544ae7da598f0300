#include "ddflow/bench.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ddflow/engine.hpp"
#include "ddflow/pipeline.hpp"

namespace ddflow {

namespace {

std::vector<std::string> string_list(const nlohmann::json& c, const char* key, std::size_t index) {
  if (!c.contains(key)) throw ManifestError("case " + std::to_string(index) + ": missing '" + key + "'");
  const auto& v = c.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ManifestError("case " + std::to_string(index) + ": '" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw ManifestError("case " + std::to_string(index) + ": '" + key + "' entries must be strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

// One analysis of one case; returns the number of flows.
std::size_t analyse(const TestCase& c, const BenchOptions& options) {
  Cpg cpg = compile_minilang_files({c.file});
  std::vector<std::filesystem::path> semantics;
  if (options.caseSemantics && c.semantics) semantics.push_back(*c.semantics);
  TaintQuery query;
  query.registry = load_semantics_files(semantics);
  query.sources = resolve_matchers(cpg, c.sources, true);
  query.sinks = resolve_matchers(cpg, c.sinks, true);
  query.maxCallDepth = options.depth;
  query.jobs = options.jobs;
  return run_query(cpg, query).flows.size();
}

CaseOutcome run_case(const TestCase& c, const BenchOptions& options) {
  CaseOutcome out;
  out.label = c.label;
  out.expectFlow = c.expectFlow;
  try {
    out.flows = analyse(c, options);
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::filesystem::path& baseDir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");
  Manifest m;
  if (!doc.contains("cases")) return m;
  if (!doc["cases"].is_array()) throw ManifestError("'cases' must be a list");
  std::size_t index = 0;
  for (const auto& c : doc["cases"]) {
    if (!c.is_object()) throw ManifestError("case " + std::to_string(index) + " must be an object");
    TestCase tc;
    if (!c.contains("file") || !c["file"].is_string())
      throw ManifestError("case " + std::to_string(index) + ": missing 'file'");
    tc.file = baseDir / c["file"].get<std::string>();
    tc.sources = string_list(c, "sources", index);
    tc.sinks = string_list(c, "sinks", index);
    if (c.contains("semantics") && !c["semantics"].is_null()) {
      if (!c["semantics"].is_string())
        throw ManifestError("case " + std::to_string(index) + ": 'semantics' must be a path");
      tc.semantics = baseDir / c["semantics"].get<std::string>();
    }
    const std::string expected = c.value("expected", "");
    if (expected != "flow" && expected != "no-flow")
      throw ManifestError("case " + std::to_string(index) + ": 'expected' must be \"flow\" or \"no-flow\"");
    tc.expectFlow = expected == "flow";
    tc.label = c.value("label", tc.file.filename().string());
    m.cases.push_back(std::move(tc));
    ++index;
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InputError& e) {
    throw ManifestError(e.what());
  }
  return parse_manifest(text, path.parent_path());
}

Metrics compute_metrics(const ConfusionMatrix& m) {
  Metrics out;
  const double tp = static_cast<double>(m.tp), tn = static_cast<double>(m.tn);
  const double fp = static_cast<double>(m.fp), fn = static_cast<double>(m.fn);
  if (2 * tp + fp + fn > 0) out.f1 = 2 * tp / (2 * tp + fp + fn);
  if (tp + fp > 0) out.precision = tp / (tp + fp);
  if (tp + fn > 0) out.recall = tp / (tp + fn);
  if (tp + fn > 0 && tn + fp > 0) out.j = tp / (tp + fn) + tn / (tn + fp) - 1;
  return out;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << *v;
  return out.str();
}

CorpusRun run_corpus(const Manifest& manifest, const BenchOptions& options) {
  CorpusRun run;
  const int iterations = std::max(1, options.iterations);
  std::vector<double> totals;
  std::vector<double> perCase(manifest.cases.size(), 0.0);
  for (int it = 0; it < iterations; ++it) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<CaseOutcome> outcomes(manifest.cases.size());
    auto timed = [&](std::size_t i) {
      const auto t0 = std::chrono::steady_clock::now();
      outcomes[i] = run_case(manifest.cases[i], options);
      perCase[i] += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };
    if (options.parallelCases) {
      std::vector<std::future<void>> pending;
      for (std::size_t i = 0; i < manifest.cases.size(); ++i) pending.push_back(std::async(std::launch::async, timed, i));
      for (auto& f : pending) f.get();
    } else {
      for (std::size_t i = 0; i < manifest.cases.size(); ++i) timed(i);
    }
    totals.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count());
    if (it == 0) run.cases = std::move(outcomes);
  }
  for (std::size_t i = 0; i < run.cases.size(); ++i) {
    auto& c = run.cases[i];
    c.meanMs = perCase[i] / iterations;
    if (c.expectFlow) {
      (c.reported() ? run.matrix.tp : run.matrix.fn)++;
    } else {
      (c.reported() ? run.matrix.fp : run.matrix.tn)++;
    }
  }
  double sum = 0;
  for (double t : totals) sum += t;
  run.meanMs = sum / iterations;
  double sq = 0;
  for (double t : totals) sq += (t - run.meanMs) * (t - run.meanMs);
  run.stddevMs = iterations > 1 ? std::sqrt(sq / (iterations - 1)) : 0.0;
  return run;
}

std::string corpus_text(const CorpusRun& run) {
  std::ostringstream out;
  out << std::left << std::setw(36) << "case" << std::setw(10) << "expected" << std::setw(8) << "flows"
      << "outcome\n";
  for (const auto& c : run.cases) {
    std::string outcome = c.failed ? "ERROR " + c.error
                          : c.expectFlow ? (c.reported() ? "TP" : "FN")
                                         : (c.reported() ? "FP" : "TN");
    out << std::left << std::setw(36) << c.label << std::setw(10) << (c.expectFlow ? "flow" : "no-flow")
        << std::setw(8) << c.flows << outcome << '\n';
  }
  const auto m = compute_metrics(run.matrix);
  out << "\nTP " << run.matrix.tp << "  TN " << run.matrix.tn << "  FP " << run.matrix.fp << "  FN " << run.matrix.fn
      << '\n';
  out << "F1 " << format_metric(m.f1) << "  J " << format_metric(m.j) << "  precision " << format_metric(m.precision)
      << "  recall " << format_metric(m.recall) << '\n';
  out << std::fixed << std::setprecision(2) << "time " << run.meanMs << " ms +- " << run.stddevMs << " ms per run\n";
  return out.str();
}

std::string corpus_json(const CorpusRun& run) {
  auto metric = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json("n/a");
  };
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const auto& c : run.cases) {
    nlohmann::ordered_json entry = {{"label", c.label},
                                    {"expected", c.expectFlow ? "flow" : "no-flow"},
                                    {"flows", c.flows},
                                    {"meanMs", c.meanMs}};
    if (c.failed) entry["error"] = c.error;
    cases.push_back(std::move(entry));
  }
  const auto m = compute_metrics(run.matrix);
  nlohmann::ordered_json doc;
  doc["cases"] = std::move(cases);
  doc["matrix"] = {{"tp", run.matrix.tp}, {"tn", run.matrix.tn}, {"fp", run.matrix.fp}, {"fn", run.matrix.fn}};
  doc["metrics"] = {{"f1", metric(m.f1)}, {"j", metric(m.j)}, {"precision", metric(m.precision)},
                    {"recall", metric(m.recall)}};
  doc["timing"] = {{"meanMs", run.meanMs}, {"stddevMs", run.stddevMs}};
  return doc.dump(2) + "\n";
}

}  // namespace ddflow
