#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ddflow::testing {

/// Random MiniLang program plus matching semantics, for oracle and property
/// tests. Sources are calls to Src.get, sinks argument 1 of Snk.put.
struct GeneratedCase {
  std::string program;
  std::string semantics;
  std::vector<std::string> ruledNames;  // externs that received a rule
};

struct GeneratorOptions {
  int maxMethods = 6;
  int maxStatements = 40;
  bool recursion = false;  // allow cyclic call graphs
};

inline constexpr const char* kGenSource = "call:Src.get";
inline constexpr const char* kGenSink = "arg:Snk.put:1";

GeneratedCase generate_case(std::mt19937_64& rng, const GeneratorOptions& options = {});

/// One extra rule for an extern that has none in `base`; nullopt when every
/// extern is already covered.
std::optional<std::string> extra_rule(std::mt19937_64& rng, const GeneratedCase& base);

/// A source passed through n nested wrappers, the innermost of which calls a
/// sanitizer, then sunk. Uses the same source and sink matchers; the
/// returned semantics make San.clean kill its input.
GeneratedCase wrapper_chain(int n);

/// Externs declared by every generated program.
const std::vector<std::string>& generated_externs();

}  // namespace ddflow::testing
