#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ddflow/cpg.hpp"

namespace ddflow {

/// Selects query endpoints by callee or method name.
///   call:PAT       values of calls to PAT
///   arg:PAT:i      i-th argument of calls to PAT
///   param:PAT[:i]  ParameterIn nodes of PAT (all, or index i)
///   ret:PAT        MethodReturn of PAT
/// PAT is an exact fullName or a glob where `*` matches any run of characters.
struct NodeMatcher {
  enum class Kind { CallTo, ArgumentOf, ParameterOf, MethodReturnOf };
  Kind kind = Kind::CallTo;
  std::string pattern;
  std::optional<int> index;
};

class MatcherError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

NodeMatcher parse_matcher(std::string_view text);
bool glob_match(std::string_view pattern, std::string_view text);

/// Operator calls (`<op.*>`) are skipped when `includeOperators` is false.
std::set<NodeId> resolve_matcher(const Cpg& cpg, const NodeMatcher& matcher, bool includeOperators = true);

}  // namespace ddflow
