#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ddflow::minilang {

struct Position {
  int line = 1;
  int column = 1;
};

enum class ExprKind {
  Identifier,  // text = name
  Literal,     // text = source spelling (integer or quoted string)
  New,         // new()
  Call,        // text = dotted callee, children = arguments
  MethodCall,  // text = method name, children[0] = receiver, rest = arguments
  Binary,      // text = operator, children = {lhs, rhs}
  Index,       // children = {base, index}
  Field,       // text = field name, children = {base}
};

struct Expr {
  ExprKind kind = ExprKind::Identifier;
  std::string text;
  std::vector<Expr> children;
  Position pos;

  /// Structural equality; positions are ignored.
  friend bool operator==(const Expr& a, const Expr& b) {
    return a.kind == b.kind && a.text == b.text && a.children == b.children;
  }
};

enum class StmtKind { Assign, ExprStmt, If, While, Return };

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  std::optional<Expr> target;  // Assign
  std::optional<Expr> expr;    // value / condition / return value (may be absent for `return;`)
  std::vector<Stmt> body;
  std::vector<Stmt> elseBody;
  bool hasElse = false;
  Position pos;

  friend bool operator==(const Stmt& a, const Stmt& b) {
    return a.kind == b.kind && a.target == b.target && a.expr == b.expr && a.body == b.body &&
           a.elseBody == b.elseBody && a.hasElse == b.hasElse;
  }
};

struct Extern {
  std::string name;  // dotted
  std::vector<std::string> params;
  Position pos;
  friend bool operator==(const Extern& a, const Extern& b) {
    return a.name == b.name && a.params == b.params;
  }
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;
  Position pos;
  friend bool operator==(const Function& a, const Function& b) {
    return a.name == b.name && a.params == b.params && a.body == b.body;
  }
};

struct Program {
  std::vector<Extern> externs;
  std::vector<Function> functions;
  friend bool operator==(const Program&, const Program&) = default;
};

enum class Severity { Error, Warning };

struct ParseDiagnostic {
  int line = 0;
  int column = 0;
  std::string message;
  Severity severity = Severity::Error;
};

struct ParseResult {
  std::optional<Program> program;  // absent whenever an error was reported
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

/// Parses a whole compilation unit. Method calls whose receiver is a dotted
/// path not rooted at a local variable are folded into static calls, so
/// `Source.getValue()` becomes a Call named "Source.getValue" while
/// `u.transform(v)` stays a MethodCall on `u`.
ParseResult parse(std::string_view source);

/// Appends `more` to `into`, reporting clashes between function or extern
/// names as diagnostics.
std::vector<ParseDiagnostic> merge(Program& into, Program more);

std::string print(const Program& program);
std::string print(const Expr& expr);

std::string format(const ParseDiagnostic& d);

}  // namespace ddflow::minilang
