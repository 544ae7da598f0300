#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddflow/cpg.hpp"
#include "ddflow/semantics.hpp"

namespace ddflow {

/// Unreadable or invalid user input (source, CPG document, semantics file).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

/// Parses and merges MiniLang files, then builds every graph layer.
Cpg compile_minilang_files(const std::vector<std::filesystem::path>& files);
Cpg compile_minilang_source(std::string_view source);

Cpg load_cpg_file(const std::filesystem::path& path);

/// Built-ins plus the rules of each file; later files shadow earlier ones.
SemanticsRegistry load_semantics_files(const std::vector<std::filesystem::path>& files, bool regex = false);

/// Union of the node sets of several matcher strings.
std::set<NodeId> resolve_matchers(const Cpg& cpg, const std::vector<std::string>& matchers, bool includeOperators);

}  // namespace ddflow
