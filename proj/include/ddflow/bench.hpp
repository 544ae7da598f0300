#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddflow {

struct TestCase {
  std::filesystem::path file;  // resolved against the manifest directory
  std::vector<std::string> sources;
  std::vector<std::string> sinks;
  std::optional<std::filesystem::path> semantics;
  bool expectFlow = false;
  std::string label;
};

struct Manifest {
  std::vector<TestCase> cases;
};

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Manifest parse_manifest(std::string_view json, const std::filesystem::path& baseDir);
Manifest load_manifest(const std::filesystem::path& path);

struct ConfusionMatrix {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;
  long total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Undefined metrics (zero denominator) are nullopt.
struct Metrics {
  std::optional<double> f1;
  std::optional<double> j;
  std::optional<double> precision;
  std::optional<double> recall;
};

Metrics compute_metrics(const ConfusionMatrix& m);
/// Three decimals, or "n/a".
std::string format_metric(const std::optional<double>& v);

struct BenchOptions {
  int depth = 5;
  int iterations = 10;
  bool caseSemantics = true;  // false: ignore per-case semantics files
  bool parallelCases = false;
  unsigned jobs = 1;
};

struct CaseOutcome {
  std::string label;
  bool expectFlow = false;
  std::size_t flows = 0;
  bool failed = false;  // engine or input error
  std::string error;
  double meanMs = 0;
  bool reported() const { return !failed && flows > 0; }
};

struct CorpusRun {
  ConfusionMatrix matrix;
  std::vector<CaseOutcome> cases;
  double meanMs = 0;    // whole corpus, per iteration
  double stddevMs = 0;
};

/// Failed cases count as "no flow reported".
CorpusRun run_corpus(const Manifest& manifest, const BenchOptions& options);

std::string corpus_text(const CorpusRun& run);
std::string corpus_json(const CorpusRun& run);

}  // namespace ddflow
