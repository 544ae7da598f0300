#include "ddflow/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "ddflow/frontend.hpp"
#include "ddflow/matcher.hpp"
#include "ddflow/minilang.hpp"

namespace ddflow {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::string describe(const std::string& file, const std::vector<minilang::ParseDiagnostic>& diags) {
  std::string msg;
  for (const auto& d : diags) {
    if (!msg.empty()) msg += '\n';
    msg += file + ":" + minilang::format(d);
  }
  return msg;
}

}  // namespace

Cpg compile_minilang_files(const std::vector<std::filesystem::path>& files) {
  minilang::Program program;
  for (const auto& file : files) {
    auto parsed = minilang::parse(read_file(file));
    if (!parsed.ok()) throw InputError(describe(file.string(), parsed.diagnostics));
    auto clashes = minilang::merge(program, std::move(*parsed.program));
    if (!clashes.empty()) throw InputError(describe(file.string(), clashes));
  }
  return compile(program);
}

Cpg compile_minilang_source(std::string_view source) {
  auto parsed = minilang::parse(source);
  if (!parsed.ok()) throw InputError(describe("<input>", parsed.diagnostics));
  return compile(*parsed.program);
}

Cpg load_cpg_file(const std::filesystem::path& path) {
  try {
    return load_cpg(read_file(path));
  } catch (const IngestError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

SemanticsRegistry load_semantics_files(const std::vector<std::filesystem::path>& files, bool regex) {
  auto registry = SemanticsRegistry::with_defaults();
  registry.enable_regex(regex);
  for (const auto& file : files) {
    auto parsed = parse_semantics(read_file(file));
    if (!parsed.ok()) {
      std::string msg;
      for (const auto& d : parsed.diagnostics) {
        if (!msg.empty()) msg += '\n';
        msg += file.string() + ":" + format(d);
      }
      throw InputError(msg);
    }
    registry.add_all(std::move(parsed.rules));
  }
  return registry;
}

std::set<NodeId> resolve_matchers(const Cpg& cpg, const std::vector<std::string>& matchers, bool includeOperators) {
  std::set<NodeId> out;
  for (const auto& text : matchers) {
    auto ids = resolve_matcher(cpg, parse_matcher(text), includeOperators);
    out.insert(ids.begin(), ids.end());
  }
  return out;
}

}  // namespace ddflow
