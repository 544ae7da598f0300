#pragma once

#include <string>
#include <vector>

#include "ddflow/cpg.hpp"

namespace ddflow {

enum class DefKind { AssignmentTarget, CallArgument, ParameterIn };

/// A definition reaching some program point.
struct DefUseFact {
  std::string variable;
  NodeId node = 0;
  DefKind kind = DefKind::CallArgument;

  friend auto operator<=>(const DefUseFact&, const DefUseFact&) = default;
};

/// Adds the DDG edges of one internal method.
///
/// Reaching definitions run over the CFG; a simple-variable assignment kills,
/// every identifier passed to a call is a weak (non-killing) redefinition.
/// Besides def->use edges the builder materializes value edges: each call
/// argument into its call, a return expression into its Return, each Return
/// into the MethodReturn, and exit-reaching parameter defs into the matching
/// ParameterOut. Edges between two arguments of one call are never added.
/// Throws CpgError when the method has no CFG.
void build_ddg(Cpg& cpg, NodeId method);

/// Definitions reaching the entry of every CFG node of `method`, computed by
/// the same fixpoint build_ddg uses. Exposed for oracle comparison.
std::vector<std::pair<NodeId, std::vector<DefUseFact>>> reaching_definitions(const Cpg& cpg, NodeId method);

}  // namespace ddflow
