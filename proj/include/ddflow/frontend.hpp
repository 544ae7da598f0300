#pragma once

#include <map>
#include <vector>

#include "ddflow/cpg.hpp"
#include "ddflow/minilang.hpp"

namespace ddflow {

/// Lowers a parsed program to the AST, CFG, CALL and ARGUMENT layers.
///
/// Per function: a Method node (CFG entry), ParameterIn/ParameterOut pairs
/// and a MethodReturn node (CFG exit). Statements become CFG nodes; `if` and
/// `while` use their condition expression as the branching node. Calls to
/// defined functions get a CALL edge to the Method; everything else is bound
/// to an ExternalMethodStub, created on first use when undeclared. Operator
/// expressions are emitted as Call nodes named after their reserved callee
/// but stay unbound until lower_operators runs.
Cpg build_ast_cfg(const minilang::Program& program);

/// Binds operator Call nodes to their `<op.*>` stubs and numbers their
/// operands (assignment: target = 1, source = 2).
void lower_operators(Cpg& cpg);

/// Adds CDG edges for one method from the post-dominator tree of its CFG.
/// Throws CpgError if some CFG node cannot reach the method exit.
void build_cdg(Cpg& cpg, NodeId method);

/// Immediate post-dominators of the CFG nodes of `method`; the exit maps to
/// itself.
std::map<NodeId, NodeId> immediate_post_dominators(const Cpg& cpg, NodeId method);

/// CFG nodes of a method: the entry, every statement/condition node, and the
/// exit.
std::vector<NodeId> cfg_nodes(const Cpg& cpg, NodeId method);

/// Internal methods (kind Method), ascending id.
std::vector<NodeId> methods(const Cpg& cpg);

/// Full pipeline: AST/CFG, operator lowering, CDG and DDG for every method.
Cpg compile(const minilang::Program& program);

}  // namespace ddflow
