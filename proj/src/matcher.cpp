#include "ddflow/matcher.hpp"

#include <charconv>
#include <vector>

#include "ddflow/operators.hpp"

namespace ddflow {

namespace {

int parse_index(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size() || value < -1)
    throw MatcherError("bad argument index in matcher '" + std::string(whole) + "'");
  return value;
}

}  // namespace

NodeMatcher parse_matcher(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw MatcherError("matcher '" + std::string(text) + "' has no kind prefix");
  std::string_view kind = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);
  NodeMatcher m;
  auto split_index = [&](bool required) {
    auto last = rest.rfind(':');
    if (last == std::string_view::npos) {
      if (required) throw MatcherError("matcher '" + std::string(text) + "' needs an argument index");
      return;
    }
    m.index = parse_index(rest.substr(last + 1), text);
    rest = rest.substr(0, last);
  };
  if (kind == "call") {
    m.kind = NodeMatcher::Kind::CallTo;
  } else if (kind == "arg") {
    m.kind = NodeMatcher::Kind::ArgumentOf;
    split_index(true);
  } else if (kind == "param") {
    m.kind = NodeMatcher::Kind::ParameterOf;
    split_index(false);
  } else if (kind == "ret") {
    m.kind = NodeMatcher::Kind::MethodReturnOf;
  } else {
    throw MatcherError("unknown matcher kind '" + std::string(kind) + "'");
  }
  if (rest.empty()) throw MatcherError("matcher '" + std::string(text) + "' has an empty name pattern");
  m.pattern = std::string(rest);
  return m;
}

bool glob_match(std::string_view pattern, std::string_view text) {
  // Iterative wildcard match with single backtrack point.
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::set<NodeId> resolve_matcher(const Cpg& cpg, const NodeMatcher& matcher, bool includeOperators) {
  std::set<NodeId> out;
  auto name_matches = [&](const std::string& fullName) {
    if (!includeOperators && is_operator_name(fullName)) return false;
    return glob_match(matcher.pattern, fullName);
  };
  std::vector<NodeId> targets;
  for (const auto& [name, id] : cpg.method_index())
    if (name_matches(name)) targets.push_back(id);

  for (NodeId method : targets) {
    switch (matcher.kind) {
      case NodeMatcher::Kind::CallTo:
        for (NodeId call : cpg.in_neighbors(method, EdgeKind::CALL)) out.insert(call);
        break;
      case NodeMatcher::Kind::ArgumentOf:
        for (NodeId call : cpg.in_neighbors(method, EdgeKind::CALL))
          for (NodeId arg : cpg.out_neighbors(call, EdgeKind::ARGUMENT))
            if (cpg.node(arg).argumentIndex == *matcher.index) out.insert(arg);
        break;
      case NodeMatcher::Kind::ParameterOf:
      case NodeMatcher::Kind::MethodReturnOf:
        for (const auto& n : cpg.nodes()) {
          if (n.methodId != method || n.id == method) continue;
          if (matcher.kind == NodeMatcher::Kind::MethodReturnOf) {
            if (n.kind == NodeKind::MethodReturn) out.insert(n.id);
          } else if (n.kind == NodeKind::ParameterIn && (!matcher.index || n.argumentIndex == *matcher.index)) {
            out.insert(n.id);
          }
        }
        break;
    }
  }
  return out;
}

}  // namespace ddflow
