#include "ddflow/minilang.hpp"

#include <sstream>

namespace ddflow::minilang {

namespace {

void print_args(std::ostream& out, const std::vector<Expr>& args, std::size_t from) {
  out << '(';
  for (std::size_t i = from; i < args.size(); ++i) {
    if (i > from) out << ", ";
    out << print(args[i]);
  }
  out << ')';
}

void print_block(std::ostream& out, const std::vector<Stmt>& body, int indent);

void print_stmt(std::ostream& out, const Stmt& s, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case StmtKind::Assign:
      out << pad << print(*s.target) << " = " << print(*s.expr) << ";\n";
      break;
    case StmtKind::ExprStmt:
      out << pad << print(*s.expr) << ";\n";
      break;
    case StmtKind::Return:
      out << pad << "return";
      if (s.expr) out << ' ' << print(*s.expr);
      out << ";\n";
      break;
    case StmtKind::If:
      out << pad << "if (" << print(*s.expr) << ") ";
      print_block(out, s.body, indent);
      if (s.hasElse) {
        out << " else ";
        print_block(out, s.elseBody, indent);
      }
      out << '\n';
      break;
    case StmtKind::While:
      out << pad << "while (" << print(*s.expr) << ") ";
      print_block(out, s.body, indent);
      out << '\n';
      break;
  }
}

void print_block(std::ostream& out, const std::vector<Stmt>& body, int indent) {
  out << "{\n";
  for (const auto& s : body) print_stmt(out, s, indent + 1);
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << '}';
}

void print_params(std::ostream& out, const std::vector<std::string>& params) {
  out << '(';
  for (std::size_t i = 0; i < params.size(); ++i) out << (i ? ", " : "") << params[i];
  out << ')';
}

}  // namespace

std::string print(const Expr& e) {
  std::ostringstream out;
  switch (e.kind) {
    case ExprKind::Identifier:
    case ExprKind::Literal:
      out << e.text;
      break;
    case ExprKind::New:
      out << "new()";
      break;
    case ExprKind::Call:
      out << e.text;
      print_args(out, e.children, 0);
      break;
    case ExprKind::MethodCall: {
      const auto& recv = e.children[0];
      bool wrap = recv.kind == ExprKind::Binary;
      out << (wrap ? "(" : "") << print(recv) << (wrap ? ")" : "") << '.' << e.text;
      print_args(out, e.children, 1);
      break;
    }
    case ExprKind::Binary: {
      // Nested binaries are parenthesised so that printing never depends on
      // precedence.
      auto side = [&](const Expr& x) {
        return x.kind == ExprKind::Binary ? "(" + print(x) + ")" : print(x);
      };
      out << side(e.children[0]) << ' ' << e.text << ' ' << side(e.children[1]);
      break;
    }
    case ExprKind::Index: {
      const auto& base = e.children[0];
      bool wrap = base.kind == ExprKind::Binary;
      out << (wrap ? "(" : "") << print(base) << (wrap ? ")" : "") << '[' << print(e.children[1]) << ']';
      break;
    }
    case ExprKind::Field: {
      const auto& base = e.children[0];
      bool wrap = base.kind == ExprKind::Binary;
      out << (wrap ? "(" : "") << print(base) << (wrap ? ")" : "") << '.' << e.text;
      break;
    }
  }
  return out.str();
}

std::string print(const Program& program) {
  std::ostringstream out;
  for (const auto& e : program.externs) {
    out << "extern " << e.name;
    print_params(out, e.params);
    out << ";\n";
  }
  for (const auto& f : program.functions) {
    out << "fn " << f.name;
    print_params(out, f.params);
    out << ' ';
    print_block(out, f.body, 0);
    out << '\n';
  }
  return out.str();
}

}  // namespace ddflow::minilang
