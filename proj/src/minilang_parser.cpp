#include "ddflow/minilang.hpp"

#include <cctype>
#include <set>
#include <sstream>
#include <unordered_set>

namespace ddflow::minilang {

namespace {

enum class Tok {
  Ident,
  Int,
  String,
  Punct,
  Keyword,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Position pos;
};

struct SyntaxError {
  Position pos;
  std::string message;
};

const std::set<std::string, std::less<>> kKeywords = {"extern", "fn", "if", "else", "while", "return", "new"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (i_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = i_;
        while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) advance();
        t.text = std::string(src_.substr(start, i_ - start));
        t.kind = kKeywords.contains(t.text) ? Tok::Keyword : Tok::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = i_;
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
        if (i_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
          throw SyntaxError{{line_, col_}, "malformed number"};
        t.text = std::string(src_.substr(start, i_ - start));
        t.kind = Tok::Int;
      } else if (c == '"') {
        std::size_t start = i_;
        advance();
        while (i_ < src_.size() && src_[i_] != '"') {
          if (src_[i_] == '\n') throw SyntaxError{t.pos, "unterminated string literal"};
          if (src_[i_] == '\\' && i_ + 1 < src_.size()) advance();
          advance();
        }
        if (i_ >= src_.size()) throw SyntaxError{t.pos, "unterminated string literal"};
        advance();
        t.text = std::string(src_.substr(start, i_ - start));
        t.kind = Tok::String;
      } else {
        static const char* twoChar[] = {"==", "!=", "<=", ">=", "&&", "||"};
        t.kind = Tok::Punct;
        for (const char* op : twoChar) {
          if (src_.substr(i_, 2) == op) {
            t.text = op;
            advance();
            advance();
            break;
          }
        }
        if (t.text.empty()) {
          static const std::string_view single = "(){}[],;.=<>+-*/%";
          if (single.find(c) == std::string_view::npos)
            throw SyntaxError{t.pos, std::string("unexpected character '") + c + "'"};
          t.text = std::string(1, c);
          advance();
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[i_]))) {
        advance();
      } else if (src_.substr(i_, 2) == "//") {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

int precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  return 0;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program prog;
    while (peek().kind != Tok::End) {
      if (is_keyword("extern")) {
        prog.externs.push_back(extern_decl());
      } else if (is_keyword("fn")) {
        prog.functions.push_back(function());
      } else {
        fail("expected 'extern' or 'fn'");
      }
    }
    return prog;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool is_keyword(std::string_view k) const { return peek().kind == Tok::Keyword && peek().text == k; }

  [[noreturn]] void fail(const std::string& message) const {
    const auto& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError{t.pos, message + ", found " + found};
  }

  void expect(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    take();
  }

  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return take().text;
  }

  std::vector<std::string> params() {
    std::vector<std::string> out;
    expect("(");
    if (!is_punct(")")) {
      out.push_back(ident("parameter name"));
      while (is_punct(",")) {
        take();
        out.push_back(ident("parameter name"));
      }
    }
    expect(")");
    return out;
  }

  Extern extern_decl() {
    Extern e;
    e.pos = take().pos;
    e.name = ident("extern name");
    while (is_punct(".")) {
      take();
      e.name += "." + ident("name segment");
    }
    e.params = params();
    expect(";");
    return e;
  }

  Function function() {
    Function f;
    f.pos = take().pos;
    f.name = ident("function name");
    f.params = params();
    f.body = block();
    return f;
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> out;
    while (!is_punct("}")) {
      if (peek().kind == Tok::End) fail("expected '}'");
      out.push_back(statement());
    }
    take();
    return out;
  }

  Stmt statement() {
    Stmt s;
    s.pos = peek().pos;
    if (is_keyword("if")) {
      take();
      s.kind = StmtKind::If;
      expect("(");
      s.expr = expression();
      expect(")");
      s.body = block();
      if (is_keyword("else")) {
        take();
        s.hasElse = true;
        s.elseBody = block();
      }
      return s;
    }
    if (is_keyword("while")) {
      take();
      s.kind = StmtKind::While;
      expect("(");
      s.expr = expression();
      expect(")");
      s.body = block();
      return s;
    }
    if (is_keyword("return")) {
      take();
      s.kind = StmtKind::Return;
      if (!is_punct(";")) s.expr = expression();
      expect(";");
      return s;
    }
    Expr e = expression();
    if (is_punct("=")) {
      if (e.kind != ExprKind::Identifier && e.kind != ExprKind::Index && e.kind != ExprKind::Field)
        throw SyntaxError{e.pos, "left side of '=' is not assignable"};
      take();
      s.kind = StmtKind::Assign;
      s.target = std::move(e);
      s.expr = expression();
    } else {
      s.kind = StmtKind::ExprStmt;
      s.expr = std::move(e);
    }
    expect(";");
    return s;
  }

  Expr expression(int minPrec = 1) {
    Expr lhs = postfix();
    while (peek().kind == Tok::Punct) {
      int prec = precedence(peek().text);
      if (prec == 0 || prec < minPrec) break;
      Token op = take();
      Expr rhs = expression(prec + 1);
      Expr bin;
      bin.kind = ExprKind::Binary;
      bin.text = op.text;
      bin.pos = lhs.pos;
      bin.children.push_back(std::move(lhs));
      bin.children.push_back(std::move(rhs));
      lhs = std::move(bin);
    }
    return lhs;
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> out;
    expect("(");
    if (!is_punct(")")) {
      out.push_back(expression());
      while (is_punct(",")) {
        take();
        out.push_back(expression());
      }
    }
    expect(")");
    return out;
  }

  Expr postfix() {
    Expr e = primary();
    for (;;) {
      if (is_punct(".")) {
        take();
        Position at = peek().pos;
        std::string name = ident("member name");
        if (is_punct("(")) {
          Expr call;
          call.kind = ExprKind::MethodCall;
          call.text = name;
          call.pos = e.pos;
          call.children.push_back(std::move(e));
          for (auto& a : arguments()) call.children.push_back(std::move(a));
          e = std::move(call);
        } else {
          Expr field;
          field.kind = ExprKind::Field;
          field.text = name;
          field.pos = at;
          field.children.push_back(std::move(e));
          e = std::move(field);
        }
      } else if (is_punct("[")) {
        take();
        Expr idx;
        idx.kind = ExprKind::Index;
        idx.pos = e.pos;
        idx.children.push_back(std::move(e));
        idx.children.push_back(expression());
        expect("]");
        e = std::move(idx);
      } else {
        return e;
      }
    }
  }

  Expr primary() {
    Expr e;
    e.pos = peek().pos;
    if (is_keyword("new")) {
      take();
      expect("(");
      expect(")");
      e.kind = ExprKind::New;
      e.text = "new";
      return e;
    }
    if (peek().kind == Tok::Int || peek().kind == Tok::String) {
      e.kind = ExprKind::Literal;
      e.text = take().text;
      return e;
    }
    if (is_punct("(")) {
      take();
      e = expression();
      expect(")");
      return e;
    }
    if (peek().kind == Tok::Ident) {
      e.text = take().text;
      if (is_punct("(")) {
        e.kind = ExprKind::Call;
        e.children = arguments();
      } else {
        e.kind = ExprKind::Identifier;
      }
      return e;
    }
    fail("expected expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Dotted path rooted at an identifier: `A`, `A.b`, `A.b.c`.
std::optional<std::string> dotted_path(const Expr& e, std::string* root) {
  if (e.kind == ExprKind::Identifier) {
    *root = e.text;
    return e.text;
  }
  if (e.kind == ExprKind::Field) {
    auto base = dotted_path(e.children[0], root);
    if (base) return *base + "." + e.text;
  }
  return std::nullopt;
}

void collect_locals(const std::vector<Stmt>& body, std::unordered_set<std::string>& locals) {
  for (const auto& s : body) {
    if (s.kind == StmtKind::Assign && s.target->kind == ExprKind::Identifier) locals.insert(s.target->text);
    collect_locals(s.body, locals);
    collect_locals(s.elseBody, locals);
  }
}

void fold_static_calls(Expr& e, const std::unordered_set<std::string>& locals) {
  for (auto& c : e.children) fold_static_calls(c, locals);
  if (e.kind != ExprKind::MethodCall) return;
  std::string root;
  auto path = dotted_path(e.children[0], &root);
  if (!path || locals.contains(root)) return;
  e.kind = ExprKind::Call;
  e.text = *path + "." + e.text;
  e.children.erase(e.children.begin());
}

void fold_static_calls(std::vector<Stmt>& body, const std::unordered_set<std::string>& locals) {
  for (auto& s : body) {
    if (s.target) fold_static_calls(*s.target, locals);
    if (s.expr) fold_static_calls(*s.expr, locals);
    fold_static_calls(s.body, locals);
    fold_static_calls(s.elseBody, locals);
  }
}

std::vector<ParseDiagnostic> check_unique_names(const Program& prog) {
  std::vector<ParseDiagnostic> out;
  std::set<std::string> seen;
  auto check = [&](const std::string& name, Position pos, const char* what) {
    if (!seen.insert(name).second)
      out.push_back({pos.line, pos.column, std::string("duplicate ") + what + " name '" + name + "'", Severity::Error});
  };
  for (const auto& e : prog.externs) check(e.name, e.pos, "extern");
  for (const auto& f : prog.functions) check(f.name, f.pos, "function");
  return out;
}

}  // namespace

ParseResult parse(std::string_view source) {
  ParseResult result;
  try {
    Parser parser(Lexer(source).run());
    Program prog = parser.program();
    for (auto& f : prog.functions) {
      std::unordered_set<std::string> locals(f.params.begin(), f.params.end());
      collect_locals(f.body, locals);
      fold_static_calls(f.body, locals);
    }
    result.diagnostics = check_unique_names(prog);
    if (result.diagnostics.empty()) result.program = std::move(prog);
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back({e.pos.line, e.pos.column, e.message, Severity::Error});
  }
  return result;
}

std::vector<ParseDiagnostic> merge(Program& into, Program more) {
  for (auto& e : more.externs) into.externs.push_back(std::move(e));
  for (auto& f : more.functions) into.functions.push_back(std::move(f));
  return check_unique_names(into);
}

std::string format(const ParseDiagnostic& d) {
  std::ostringstream out;
  out << d.line << ':' << d.column << ": " << (d.severity == Severity::Error ? "error" : "warning") << ": "
      << d.message;
  return out.str();
}

}  // namespace ddflow::minilang
