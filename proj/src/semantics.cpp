#include "ddflow/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "ddflow/operators.hpp"

namespace ddflow {

namespace {

constexpr std::string_view kPassthrough = "PASSTHROUGH";
constexpr std::string_view kTaintAll = "TAINT_ALL";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// Parses one side of a mapping; returns an error message on failure.
std::optional<std::string> parse_spec(std::string_view text, ArgSpec& out) {
  if (is_identifier(text)) {
    out = ArgSpec::param(std::string(text));
    return std::nullopt;
  }
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size())
    return "malformed argument '" + std::string(text) + "'";
  if (value < kReturnIndex) return "argument index " + std::string(text) + " is below -1";
  out = ArgSpec::at(value);
  return std::nullopt;
}

std::string spec_text(const ArgSpec& s) { return s.named() ? s.name : std::to_string(s.index); }

std::string callee_name(const Cpg& cpg, NodeId call) {
  auto callees = cpg.out_neighbors(call, EdgeKind::CALL);
  if (!callees.empty()) return cpg.node(callees.front()).fullName;
  return cpg.node(call).name;
}

std::optional<NodeId> argument_at(const Cpg& cpg, NodeId call, int index) {
  for (NodeId a : cpg.out_neighbors(call, EdgeKind::ARGUMENT))
    if (cpg.node(a).argumentIndex == index) return a;
  return std::nullopt;
}

bool is_access_operator(const std::string& name) { return name == kOpIndexAccess || name == kOpFieldAccess; }

}  // namespace

void FlowSemantic::add(FlowMapping m) {
  auto it = std::lower_bound(mappings.begin(), mappings.end(), m);
  if (it == mappings.end() || *it != m) mappings.insert(it, std::move(m));
}

namespace {

// Blanks out /* */ comments outside quoted names, keeping newlines so line
// numbers stay put. Returns the line of an unterminated comment, or 0.
int strip_block_comments(std::string& text) {
  bool quoted = false;
  int line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      quoted = false;
    } else if (text[i] == '"') {
      quoted = !quoted;
    } else if (!quoted && text.compare(i, 2, "/*") == 0) {
      const int start = line;
      auto end = text.find("*/", i + 2);
      if (end == std::string::npos) return start;
      for (std::size_t j = i; j < end + 2; ++j) {
        if (text[j] == '\n') ++line;
        else text[j] = ' ';
      }
      i = end + 1;
    }
  }
  return 0;
}

}  // namespace

SemanticsParseResult parse_semantics(std::string_view input) {
  SemanticsParseResult result;
  std::string stripped(input);
  if (int open = strip_block_comments(stripped)) {
    result.diagnostics.push_back({open, "unterminated comment"});
    return result;
  }
  std::string_view text = stripped;
  int lineNo = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineNo;

    // A '#' inside the quoted name is part of the name.
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fail = [&](std::string msg) { result.diagnostics.push_back({lineNo, std::move(msg)}); };
    if (line.front() != '"') {
      fail("missing quoted method name");
      continue;
    }
    auto close = line.find('"', 1);
    if (close == std::string_view::npos) {
      fail("unterminated method name");
      continue;
    }
    FlowSemantic rule;
    rule.fullName = std::string(line.substr(1, close - 1));
    rule.line = lineNo;
    if (rule.fullName.empty()) {
      fail("empty method name");
      continue;
    }
    std::string_view rest = line.substr(close + 1);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    if (!rest.empty() && !std::isspace(static_cast<unsigned char>(rest.front()))) {
      fail("expected whitespace after method name");
      continue;
    }

    bool bad = false;
    std::istringstream tokens{std::string(rest)};
    std::string token;
    while (tokens >> token) {
      if (token == kPassthrough) {
        rule.passthrough = true;
        continue;
      }
      if (token == kTaintAll) {
        rule.taintAll = true;
        continue;
      }
      auto arrow = token.find("->");
      if (arrow == std::string::npos) {
        fail("malformed mapping token '" + token + "'");
        bad = true;
        break;
      }
      FlowMapping m;
      std::string_view t = token;
      if (auto err = parse_spec(t.substr(0, arrow), m.src)) {
        fail(*err + " in '" + token + "'");
        bad = true;
        break;
      }
      if (auto err = parse_spec(t.substr(arrow + 2), m.dst)) {
        fail(*err + " in '" + token + "'");
        bad = true;
        break;
      }
      if (!m.src.named() && m.src.index == kReturnIndex) {
        fail("return cannot be a flow source");
        bad = true;
        break;
      }
      rule.add(std::move(m));
    }
    if (!bad) result.rules.push_back(std::move(rule));
  }
  return result;
}

std::string print_semantics(const std::vector<FlowSemantic>& rules) {
  std::ostringstream out;
  for (const auto& r : rules) {
    out << '"' << r.fullName << '"';
    for (const auto& m : r.mappings) out << ' ' << spec_text(m.src) << "->" << spec_text(m.dst);
    if (r.passthrough) out << ' ' << kPassthrough;
    if (r.taintAll) out << ' ' << kTaintAll;
    out << '\n';
  }
  return out.str();
}

std::string format(const SemanticsDiagnostic& d) {
  return "line " + std::to_string(d.line) + ": " + d.message;
}

std::vector<FlowSemantic> default_operator_semantics() {
  auto rule = [](std::string_view name, std::initializer_list<std::pair<int, int>> pairs) {
    FlowSemantic r;
    r.fullName = std::string(name);
    for (auto [s, d] : pairs) r.add({ArgSpec::at(s), ArgSpec::at(d)});
    return r;
  };
  return {
      rule(kOpAssignment, {{2, 1}, {2, -1}}),
      rule(kOpBinary, {{1, -1}, {2, -1}, {1, 1}, {2, 2}}),
      rule(kOpIndexAccess, {{1, -1}, {1, 1}, {2, 2}}),
      rule(kOpFieldAccess, {{1, -1}, {1, 1}, {2, 2}}),
  };
}

SemanticsRegistry SemanticsRegistry::with_defaults() {
  SemanticsRegistry reg;
  for (auto& r : default_operator_semantics()) reg.builtin_[r.fullName] = r;
  return reg;
}

void SemanticsRegistry::add(FlowSemantic rule) {
  try {
    patterns_.emplace_back(std::regex(rule.fullName, std::regex::ECMAScript), rule.fullName);
  } catch (const std::regex_error&) {
    // Not a usable pattern; the rule still matches exactly.
  }
  std::string key = rule.fullName;
  user_.insert_or_assign(std::move(key), std::move(rule));
}

void SemanticsRegistry::add_all(std::vector<FlowSemantic> rules) {
  for (auto& r : rules) add(std::move(r));
}

void SemanticsRegistry::enable_regex(bool on) { regex_ = on; }

const FlowSemantic* SemanticsRegistry::lookup(std::string_view fullName) const {
  if (auto it = user_.find(fullName); it != user_.end()) return &it->second;
  auto colon = fullName.find(':');
  if (colon == std::string_view::npos) {
    std::string prefix = std::string(fullName) + ":";
    auto it = user_.lower_bound(prefix);
    if (it != user_.end() && it->first.starts_with(prefix)) return &it->second;
  } else if (auto it = user_.find(fullName.substr(0, colon)); it != user_.end()) {
    return &it->second;
  }
  if (regex_) {
    const std::string name(fullName);
    for (auto it = patterns_.rbegin(); it != patterns_.rend(); ++it)
      if (std::regex_match(name, it->first)) return &user_.at(it->second);
  }
  if (auto it = builtin_.find(fullName); it != builtin_.end()) return &it->second;
  return nullptr;
}

void MappingSet::add(int src, int dst) {
  std::pair<int, int> p{src, dst};
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), p);
  if (it == pairs_.end() || *it != p) pairs_.insert(it, p);
}

bool MappingSet::has(int src, int dst) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), std::pair<int, int>{src, dst});
}

bool MappingSet::defines_return() const {
  return std::any_of(pairs_.begin(), pairs_.end(), [](const auto& p) { return p.second == kReturnIndex; });
}

bool MappingSet::uses(int src) const {
  return std::any_of(pairs_.begin(), pairs_.end(), [&](const auto& p) { return p.first == src; });
}

MappingSet evaluate_at(const Cpg& cpg, const FlowSemantic& rule, NodeId call) {
  std::vector<int> site;
  for (NodeId a : cpg.out_neighbors(call, EdgeKind::ARGUMENT)) site.push_back(cpg.node(a).argumentIndex);
  std::sort(site.begin(), site.end());

  std::map<std::string, int> named;
  for (NodeId callee : cpg.out_neighbors(call, EdgeKind::CALL))
    for (NodeId p : cpg.out_neighbors(callee, EdgeKind::AST))
      if (cpg.node(p).kind == NodeKind::ParameterIn) named.emplace(cpg.node(p).name, cpg.node(p).argumentIndex);
  auto resolve = [&](const ArgSpec& s) -> std::optional<int> {
    if (!s.named()) return s.index;
    if (auto it = named.find(s.name); it != named.end()) return it->second;
    return std::nullopt;
  };

  MappingSet out;
  for (const auto& m : rule.mappings) {
    auto s = resolve(m.src);
    auto d = resolve(m.dst);
    if (s && d && *s != kReturnIndex) out.add(*s, *d);
  }
  const bool hasFirst = std::binary_search(site.begin(), site.end(), 1);
  if (rule.passthrough) {
    for (int i : site) out.add(i, i);
    if (hasFirst) out.add(1, kReturnIndex);
  }
  if (rule.taintAll) {
    for (int i : site) {
      for (int j : site) out.add(i, j);
      out.add(i, kReturnIndex);
    }
  }
  return out;
}

CallSemantics::CallSemantics(const Cpg& cpg, const SemanticsRegistry& registry) {
  for (const auto& n : cpg.nodes()) {
    if (n.kind != NodeKind::Call) continue;
    auto callees = cpg.out_neighbors(n.id, EdgeKind::CALL);
    if (callees.empty() || cpg.node(callees.front()).kind == NodeKind::Method) continue;
    if (const FlowSemantic* rule = registry.lookup(cpg.node(callees.front()).fullName))
      sites_.emplace(n.id, evaluate_at(cpg, *rule, n.id));
  }
}

const MappingSet* CallSemantics::at(NodeId call) const {
  auto it = sites_.find(call);
  return it == sites_.end() ? nullptr : &it->second;
}

std::string_view to_string(EdgeValidity v) {
  switch (v) {
    case EdgeValidity::Valid:
      return "valid";
    case EdgeValidity::ValidUnresolved:
      return "valid-unresolved";
    case EdgeValidity::Invalid:
      return "invalid";
  }
  return "?";
}

std::optional<NodeId> call_of_argument(const Cpg& cpg, NodeId n) {
  auto owners = cpg.in_neighbors(n, EdgeKind::ARGUMENT);
  if (owners.empty()) return std::nullopt;
  return owners.front();
}

bool edge_exists(const Cpg& cpg, NodeId child, NodeId parent) {
  if (!cpg.contains(child) || !cpg.contains(parent)) return false;
  if (cpg.has_edge(parent, child, EdgeKind::DDG)) return true;
  auto childCall = call_of_argument(cpg, child);
  if (!childCall) return false;
  if (child != parent && call_of_argument(cpg, parent) == childCall) return true;
  // Write-through: `a[i] = e` / `a.f = e` lets e reach the base `a`.
  if (cpg.node(child).argumentIndex != 1 || !is_access_operator(callee_name(cpg, *childCall))) return false;
  auto assign = call_of_argument(cpg, *childCall);
  if (!assign || cpg.node(*childCall).argumentIndex != 1 || callee_name(cpg, *assign) != kOpAssignment)
    return false;
  return argument_at(cpg, *assign, 2) == parent;
}

EdgeValidity is_valid_edge(const Cpg& cpg, const CallSemantics& sem, NodeId child, NodeId parent) {
  if (!edge_exists(cpg, child, parent))
    throw ContractViolation("no data edge from " + std::to_string(parent) + " to " + std::to_string(child));
  const auto& c = cpg.node(child);
  const auto& p = cpg.node(parent);

  if (p.kind == NodeKind::Call) {
    const MappingSet* m = sem.at(parent);
    if (m && !m->defines_return()) return EdgeValidity::Invalid;
  }

  auto parentCall = call_of_argument(cpg, parent);
  if (c.kind == NodeKind::Call && parentCall == child) {
    const MappingSet* m = sem.at(child);
    return !m || m->has(p.argumentIndex, kReturnIndex) ? EdgeValidity::Valid : EdgeValidity::Invalid;
  }

  auto childCall = call_of_argument(cpg, child);
  if (!childCall) return EdgeValidity::Valid;
  if (!parentCall) return EdgeValidity::ValidUnresolved;

  const MappingSet* m = sem.at(*childCall);
  if (!m) return EdgeValidity::Valid;
  if (*parentCall == *childCall)
    return m->has(p.argumentIndex, c.argumentIndex) ? EdgeValidity::Valid : EdgeValidity::Invalid;
  return m->uses(c.argumentIndex) ? EdgeValidity::Valid : EdgeValidity::Invalid;
}

EdgeValidity is_valid_edge(const Cpg& cpg, const SemanticsRegistry& registry, NodeId child, NodeId parent) {
  return is_valid_edge(cpg, CallSemantics(cpg, registry), child, parent);
}

}  // namespace ddflow
