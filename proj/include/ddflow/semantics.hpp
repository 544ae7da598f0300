#pragma once

#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ddflow/cpg.hpp"

namespace ddflow {

inline constexpr int kReturnIndex = -1;
inline constexpr int kReceiverIndex = 0;

/// An argument position: an integer index (-1 return, 0 receiver, 1.. positional)
/// or a parameter name resolved against the callee's ParameterIn nodes.
struct ArgSpec {
  int index = 0;
  std::string name;  // non-empty for named specs

  bool named() const { return !name.empty(); }
  static ArgSpec at(int i) { return ArgSpec{i, {}}; }
  static ArgSpec param(std::string n) { return ArgSpec{0, std::move(n)}; }

  friend auto operator<=>(const ArgSpec&, const ArgSpec&) = default;
};

struct FlowMapping {
  ArgSpec src;
  ArgSpec dst;
  friend auto operator<=>(const FlowMapping&, const FlowMapping&) = default;
};

/// One rule of a semantics file. Mappings are kept sorted and unique.
/// An empty rule (no mappings, no macro) kills every flow through the call.
struct FlowSemantic {
  std::string fullName;
  std::vector<FlowMapping> mappings;
  bool passthrough = false;  // i->i for every argument at the site, plus 1->-1
  bool taintAll = false;     // i->j for all site indices including -1 as target
  int line = 0;

  void add(FlowMapping m);
  friend bool operator==(const FlowSemantic& a, const FlowSemantic& b) {
    return a.fullName == b.fullName && a.mappings == b.mappings && a.passthrough == b.passthrough &&
           a.taintAll == b.taintAll;
  }
};

struct SemanticsDiagnostic {
  int line = 0;
  std::string message;
};

struct SemanticsParseResult {
  std::vector<FlowSemantic> rules;
  std::vector<SemanticsDiagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

/// Grammar: one rule per line, `#` starts a comment.
///   rule  := "fullName" token*
///   token := spec->spec | PASSTHROUGH | TAINT_ALL
///   spec  := integer >= -1 | identifier
SemanticsParseResult parse_semantics(std::string_view text);
std::string print_semantics(const std::vector<FlowSemantic>& rules);
std::string format(const SemanticsDiagnostic& d);

/// Built-in rules for the reserved operator callees.
std::vector<FlowSemantic> default_operator_semantics();

/// Rule store. User rules shadow built-ins; a later rule for the same name
/// replaces an earlier one.
class SemanticsRegistry {
 public:
  /// Registry holding only the built-in operator rules.
  static SemanticsRegistry with_defaults();

  void add(FlowSemantic rule);
  void add_all(std::vector<FlowSemantic> rules);
  /// When enabled, user rule names that fail exact matching are also tried
  /// as ECMAScript regular expressions over the whole name.
  void enable_regex(bool on);

  /// Lookup order: exact user rule; for an unsigned name the first user rule
  /// `name:signature` in lexicographic order; for a signed name the unsigned
  /// user rule; regex user rules (if enabled, latest first); built-in rule.
  /// nullptr means the call is over-approximated.
  const FlowSemantic* lookup(std::string_view fullName) const;

  std::size_t user_rule_count() const { return user_.size(); }

 private:
  std::map<std::string, FlowSemantic, std::less<>> builtin_;
  std::map<std::string, FlowSemantic, std::less<>> user_;
  std::vector<std::pair<std::regex, std::string>> patterns_;  // insertion order
  bool regex_ = false;
};

/// Concrete index pairs of a rule evaluated at one call site.
class MappingSet {
 public:
  void add(int src, int dst);
  bool has(int src, int dst) const;
  bool defines_return() const;
  bool uses(int src) const;
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

 private:
  std::vector<std::pair<int, int>> pairs_;  // sorted, unique
};

/// Effective semantics of every call site: macros expanded against the
/// site's arguments and named specs resolved. Calls to internal methods never
/// receive semantics.
class CallSemantics {
 public:
  CallSemantics(const Cpg& cpg, const SemanticsRegistry& registry);

  /// nullptr when the call has no semantics (over-approximation).
  const MappingSet* at(NodeId call) const;

 private:
  std::map<NodeId, MappingSet> sites_;
};

MappingSet evaluate_at(const Cpg& cpg, const FlowSemantic& rule, NodeId call);

enum class EdgeValidity { Valid, ValidUnresolved, Invalid };
std::string_view to_string(EdgeValidity v);

/// Raised when is_valid_edge is asked about an edge that does not exist.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Call node owning argument `n`, if any.
std::optional<NodeId> call_of_argument(const Cpg& cpg, NodeId n);

/// True if the query engine may step from `child` back to `parent`: a
/// materialized DDG edge, two arguments of one call, or an assignment source
/// feeding the base of an index/field target.
bool edge_exists(const Cpg& cpg, NodeId child, NodeId parent);

/// Classifies the step from `child` to its data parent `parent`.
EdgeValidity is_valid_edge(const Cpg& cpg, const CallSemantics& sem, NodeId child, NodeId parent);
EdgeValidity is_valid_edge(const Cpg& cpg, const SemanticsRegistry& registry, NodeId child, NodeId parent);

}  // namespace ddflow
