#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentlint/error.hpp"
#include "agentlint/python/ast.hpp"
#include "agentlint/python/tokenizer.hpp"
#include "agentlint/text.hpp"

namespace agentlint::py {

namespace detail {

inline constexpr std::array<std::string_view, 35> kKeywords{
    "False", "None",   "True",    "and",      "as",     "assert", "async", "await",    "break",
    "class", "continue", "def",   "del",      "elif",   "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",     "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",    "while",  "with",   "yield"};

inline bool is_keyword(std::string_view s) {
  for (auto k : kKeywords) {
    if (k == s) return true;
  }
  return false;
}

inline constexpr std::array<std::string_view, 13> kAugOps{"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                                          ">>=", "<<=", "&=", "|=", "^=", "@="};

// Raised on a construct outside the supported grammar; the enclosing
// statement degrades to an opaque node.
struct ParseFailure {
  std::size_t offset;
  std::string message;
};

}  // namespace detail

class Parser {
 public:
  Parser(std::string_view source, std::string file, const text::LineIndex& lines, std::vector<Token> tokens)
      : src_(source), file_(std::move(file)), lines_(lines), toks_(std::move(tokens)) {}

  std::vector<Stmt> parse_module() {
    std::vector<Stmt> body;
    while (!at(TokKind::End)) {
      if (at(TokKind::Newline)) {
        advance();
        continue;
      }
      if (at(TokKind::Dedent)) {
        advance();
        continue;
      }
      parse_statement(body);
    }
    return body;
  }

  // Entry point for a standalone expression (f-string fields).
  Expr parse_expression_only() {
    auto e = parse_star_or_test();
    if (!at(TokKind::End)) fail("unexpected trailing tokens in expression");
    return e;
  }

 private:
  // --- token helpers ---------------------------------------------------
  const Token& cur() const { return toks_[idx_]; }
  const Token& peek(std::size_t k = 1) const { return toks_[std::min(idx_ + k, toks_.size() - 1)]; }
  bool at(TokKind k) const { return cur().kind == k; }
  bool at_op(std::string_view op) const { return cur().kind == TokKind::Op && cur().text == op; }
  bool at_kw(std::string_view kw) const { return cur().kind == TokKind::Name && cur().text == kw; }

  const Token& advance() {
    const auto& t = toks_[idx_];
    if (t.kind != TokKind::Newline && t.kind != TokKind::Indent && t.kind != TokKind::Dedent &&
        t.kind != TokKind::End) {
      last_end_ = t.end;
    }
    if (idx_ + 1 < toks_.size()) ++idx_;
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw detail::ParseFailure{cur().begin, msg}; }

  void expect_op(std::string_view op) {
    if (!at_op(op)) fail("expected '" + std::string(op) + "'");
    advance();
  }

  std::string expect_name() {
    if (!at(TokKind::Name) || detail::is_keyword(cur().text)) fail("expected identifier");
    return std::string(advance().text);
  }

  Span span_from(std::size_t begin) const {
    const auto end = std::max(begin, last_end_);
    return Span{begin, end, lines_.line_of(begin), lines_.line_of(end > begin ? end - 1 : begin)};
  }

  void skip_to_line_end() {
    while (!at(TokKind::Newline) && !at(TokKind::End)) advance();
  }

  // --- statements ------------------------------------------------------
  void parse_statement(std::vector<Stmt>& out) {
    if (at(TokKind::Indent)) throw SyntaxError(file_, lines_.line_of(cur().end), "unexpected indent");
    const auto save = idx_;
    const auto begin = cur().begin;
    try {
      if (at_op("@") || at_kw("class") || at_kw("def") || at_kw("if") || at_kw("while") || at_kw("for") ||
          at_kw("try") || at_kw("with") ||
          (at_kw("async") && (peek().text == "def" || peek().text == "for" || peek().text == "with"))) {
        out.push_back(parse_compound());
        return;
      }
      if (at(TokKind::Name) && !detail::is_keyword(cur().text) && generic_compound_line()) {
        out.push_back(parse_generic_compound());
        return;
      }
      parse_simple_line(out);
    } catch (const detail::ParseFailure&) {
      // Degrade: everything from the failing statement to the end of its
      // logical line (plus an indented block, if one follows) is opaque.
      idx_ = save;
      Stmt s;
      s.kind = StmtKind::Opaque;
      s.name = cur().kind == TokKind::Name ? std::string(cur().text) : std::string{};
      skip_to_line_end();
      s.span = span_from(begin);
      if (at(TokKind::Newline)) advance();
      if (at(TokKind::Indent)) {
        advance();
        s.body = parse_block_until_dedent();
        s.span = span_from(begin);
      }
      out.push_back(std::move(s));
    }
  }

  bool generic_compound_line() const {
    std::size_t k = idx_;
    std::size_t last = idx_;
    while (toks_[k].kind != TokKind::Newline && toks_[k].kind != TokKind::End) last = k++;
    return toks_[last].kind == TokKind::Op && toks_[last].text == ":" && toks_[k].kind == TokKind::Newline &&
           k + 1 < toks_.size() && toks_[k + 1].kind == TokKind::Indent;
  }

  std::vector<Stmt> parse_block_until_dedent() {
    std::vector<Stmt> body;
    while (!at(TokKind::Dedent) && !at(TokKind::End)) {
      if (at(TokKind::Newline)) {
        advance();
        continue;
      }
      parse_statement(body);
    }
    if (at(TokKind::Dedent)) advance();
    return body;
  }

  std::vector<Stmt> parse_suite() {
    expect_op(":");
    if (at(TokKind::Newline)) {
      advance();
      if (!at(TokKind::Indent)) {
        throw SyntaxError(file_, lines_.line_of(cur().begin), "expected an indented block");
      }
      advance();
      return parse_block_until_dedent();
    }
    std::vector<Stmt> body;
    parse_simple_line(body);
    return body;
  }

  Stmt parse_generic_compound() {
    Stmt s;
    s.kind = StmtKind::Opaque;
    const auto begin = cur().begin;
    s.name = std::string(cur().text);
    while (!(at_op(":") && peek().kind == TokKind::Newline)) advance();
    s.body = parse_suite();
    s.span = span_from(begin);
    return s;
  }

  Stmt parse_compound() {
    const auto begin = cur().begin;
    std::vector<Expr> decorators;
    while (at_op("@")) {
      advance();
      decorators.push_back(parse_namedexpr_test());
      if (!at(TokKind::Newline)) fail("expected newline after decorator");
      advance();
    }
    bool is_async = false;
    if (at_kw("async")) {
      advance();
      is_async = true;
    }
    Stmt s;
    s.is_async = is_async;
    s.decorators = std::move(decorators);
    if (at_kw("class")) {
      const auto kw_begin = cur().begin;
      advance();
      s.kind = StmtKind::ClassDef;
      s.name = expect_name();
      if (at_op("(")) {
        advance();
        s.bases = parse_call_args(")");
        expect_op(")");
      }
      s.body = parse_suite();
      s.span = span_from(kw_begin);
    } else if (at_kw("def")) {
      const auto kw_begin = s.is_async ? begin_of_async(begin) : cur().begin;
      advance();
      s.kind = StmtKind::FunctionDef;
      s.name = expect_name();
      expect_op("(");
      s.params = parse_params(")");
      expect_op(")");
      if (at_op("->")) {
        advance();
        s.returns = parse_test();
      }
      s.body = parse_suite();
      s.span = span_from(kw_begin);
    } else if (!s.decorators.empty()) {
      fail("decorator must precede class or def");
    } else if (at_kw("if")) {
      s = parse_if();
    } else if (at_kw("while")) {
      advance();
      s.kind = StmtKind::While;
      s.value = parse_namedexpr_test();
      s.body = parse_suite();
      if (at_kw("else")) {
        advance();
        s.orelse = parse_suite();
      }
      s.span = span_from(begin);
    } else if (at_kw("for")) {
      advance();
      s.kind = StmtKind::For;
      s.targets.push_back(parse_target_list());
      if (!at_kw("in")) fail("expected 'in'");
      advance();
      s.value = parse_testlist_star();
      s.body = parse_suite();
      if (at_kw("else")) {
        advance();
        s.orelse = parse_suite();
      }
      s.span = span_from(begin);
    } else if (at_kw("try")) {
      advance();
      s.kind = StmtKind::Try;
      s.body = parse_suite();
      while (at_kw("except")) {
        ExceptHandler h;
        const auto hb = cur().begin;
        advance();
        if (at_op("*")) advance();
        if (!at_op(":")) {
          h.type = parse_test();
          if (at_kw("as")) {
            advance();
            h.name = expect_name();
          } else if (at_op(",")) {
            advance();
            h.name = expect_name();
          }
        }
        h.body = parse_suite();
        h.span = span_from(hb);
        s.handlers.push_back(std::move(h));
      }
      if (at_kw("else")) {
        advance();
        s.orelse = parse_suite();
      }
      if (at_kw("finally")) {
        advance();
        s.finalbody = parse_suite();
      }
      if (s.handlers.empty() && s.finalbody.empty()) fail("try without except or finally");
      s.span = span_from(begin);
    } else if (at_kw("with")) {
      advance();
      s.kind = StmtKind::With;
      const bool parens = at_op("(") && with_items_parenthesized();
      if (parens) advance();
      while (true) {
        if (parens && at_op(")")) break;
        s.exprs.push_back(parse_test());
        if (at_kw("as")) {
          advance();
          s.targets.push_back(parse_target());
        }
        if (!at_op(",")) break;
        advance();
      }
      if (parens) expect_op(")");
      s.body = parse_suite();
      s.span = span_from(begin);
    } else {
      fail("unsupported compound statement");
    }
    return s;
  }

  std::size_t begin_of_async(std::size_t fallback) const {
    // the 'async' token sits right before the current 'def'
    return idx_ > 0 && toks_[idx_ - 1].text == "async" ? toks_[idx_ - 1].begin : fallback;
  }

  bool with_items_parenthesized() const {
    // `with (a as b, c):` versus `with (a) as b:` / `with (yield):`
    int depth = 0;
    std::size_t k = idx_;
    for (; toks_[k].kind != TokKind::End && toks_[k].kind != TokKind::Newline; ++k) {
      if (toks_[k].kind != TokKind::Op) continue;
      const auto t = toks_[k].text;
      if (t == "(" || t == "[" || t == "{") ++depth;
      else if (t == ")" || t == "]" || t == "}") {
        if (--depth == 0) break;
      }
    }
    return toks_[k].kind == TokKind::Op && toks_[k + 1].kind == TokKind::Op && toks_[k + 1].text == ":";
  }

  Stmt parse_if() {
    Stmt s;
    s.kind = StmtKind::If;
    const auto begin = cur().begin;
    advance();  // 'if' or 'elif'
    s.value = parse_namedexpr_test();
    s.body = parse_suite();
    if (at_kw("elif")) {
      s.orelse.push_back(parse_if());
    } else if (at_kw("else")) {
      advance();
      s.orelse = parse_suite();
    }
    s.span = span_from(begin);
    return s;
  }

  std::vector<Param> parse_params(std::string_view close) {
    std::vector<Param> params;
    while (!at_op(close)) {
      Param p;
      const auto b = cur().begin;
      if (at_op("/")) {
        advance();
      } else {
        if (at_op("*") || at_op("**")) p.star = std::string(advance().text);
        if (at(TokKind::Name) && !detail::is_keyword(cur().text)) {
          p.name = expect_name();
          if (close == ")" && at_op(":")) {
            advance();
            p.annotation = at_op("*") ? parse_star_expr() : parse_test();
          }
          if (at_op("=")) {
            advance();
            p.default_value = parse_test();
          }
        } else if (p.star != "*") {
          fail("expected parameter name");
        }
        p.span = span_from(b);
        params.push_back(std::move(p));
      }
      if (!at_op(",")) break;
      advance();
    }
    return params;
  }

  void parse_simple_line(std::vector<Stmt>& out) {
    while (true) {
      out.push_back(parse_small_statement());
      if (at_op(";")) {
        advance();
        if (at(TokKind::Newline) || at(TokKind::End)) break;
        continue;
      }
      break;
    }
    if (at(TokKind::Newline)) advance();
    else if (!at(TokKind::End)) fail("expected end of statement");
  }

  Stmt parse_small_statement() {
    Stmt s;
    const auto begin = cur().begin;
    if (at_kw("pass")) {
      advance();
      s.kind = StmtKind::Pass;
    } else if (at_kw("break")) {
      advance();
      s.kind = StmtKind::Break;
    } else if (at_kw("continue")) {
      advance();
      s.kind = StmtKind::Continue;
    } else if (at_kw("return")) {
      advance();
      s.kind = StmtKind::Return;
      if (!at_statement_end()) s.value = parse_testlist_star();
    } else if (at_kw("raise")) {
      advance();
      s.kind = StmtKind::Raise;
      if (!at_statement_end()) {
        s.value = parse_test();
        if (at_kw("from")) {
          advance();
          s.exprs.push_back(parse_test());
        }
      }
    } else if (at_kw("assert")) {
      advance();
      s.kind = StmtKind::Assert;
      s.value = parse_test();
      if (at_op(",")) {
        advance();
        s.exprs.push_back(parse_test());
      }
    } else if (at_kw("import")) {
      advance();
      s.kind = StmtKind::Import;
      while (true) {
        ImportAlias a;
        a.name = parse_dotted_name();
        if (at_kw("as")) {
          advance();
          a.asname = expect_name();
        }
        s.names.push_back(std::move(a));
        if (!at_op(",")) break;
        advance();
      }
    } else if (at_kw("from")) {
      advance();
      s.kind = StmtKind::ImportFrom;
      while (at_op(".") || at_op("...")) s.level += static_cast<std::uint32_t>(advance().text.size());
      if (!at_kw("import")) s.name = parse_dotted_name();
      if (!at_kw("import")) fail("expected 'import'");
      advance();
      if (at_op("*")) {
        advance();
        s.names.push_back({"*", ""});
      } else {
        const bool paren = at_op("(");
        if (paren) advance();
        while (true) {
          if (paren && at_op(")")) break;
          ImportAlias a;
          a.name = expect_name();
          if (at_kw("as")) {
            advance();
            a.asname = expect_name();
          }
          s.names.push_back(std::move(a));
          if (!at_op(",")) break;
          advance();
        }
        if (paren) expect_op(")");
      }
    } else if (at_kw("global") || at_kw("nonlocal") || at_kw("del")) {
      s.kind = StmtKind::Opaque;
      s.name = std::string(advance().text);
      if (s.name == "del") {
        s.exprs.push_back(parse_testlist_star());
      } else {
        while (!at_statement_end()) advance();
      }
    } else {
      auto first = at_kw("yield") ? parse_yield() : parse_testlist_star();
      if (at_op(":")) {
        advance();
        s.kind = StmtKind::AnnAssign;
        s.annotation = parse_test();
        s.targets.push_back(std::move(first));
        if (at_op("=")) {
          advance();
          s.value = at_kw("yield") ? parse_yield() : parse_testlist_star();
        }
      } else if (cur().kind == TokKind::Op && is_aug_op(cur().text)) {
        s.kind = StmtKind::AugAssign;
        s.name = std::string(advance().text);
        s.targets.push_back(std::move(first));
        s.value = at_kw("yield") ? parse_yield() : parse_testlist_star();
      } else if (at_op("=")) {
        s.kind = StmtKind::Assign;
        s.targets.push_back(std::move(first));
        while (at_op("=")) {
          advance();
          auto rhs = at_kw("yield") ? parse_yield() : parse_testlist_star();
          if (at_op("=")) s.targets.push_back(std::move(rhs));
          else s.value = std::move(rhs);
        }
      } else {
        s.kind = StmtKind::ExprStmt;
        s.value = std::move(first);
      }
    }
    if (!at_statement_end()) fail("unexpected token in statement");
    s.span = span_from(begin);
    return s;
  }

  static bool is_aug_op(std::string_view t) {
    for (auto op : detail::kAugOps) {
      if (op == t) return true;
    }
    return false;
  }

  bool at_statement_end() const { return at(TokKind::Newline) || at(TokKind::End) || at_op(";"); }

  std::string parse_dotted_name() {
    std::string name = expect_name();
    while (at_op(".")) {
      advance();
      name += "." + expect_name();
    }
    return name;
  }

  // --- expressions -----------------------------------------------------
  Expr make_expr(ExprKind kind, std::size_t begin) const {
    Expr e;
    e.kind = kind;
    e.span = span_from(begin);
    return e;
  }

  Expr wrap(ExprKind kind, std::size_t begin, std::string text, std::vector<Expr> children) const {
    Expr e = make_expr(kind, begin);
    e.text = std::move(text);
    e.children = std::move(children);
    return e;
  }

  Expr parse_yield() {
    const auto b = cur().begin;
    advance();
    std::string kind = "yield";
    std::vector<Expr> kids;
    if (at_kw("from")) {
      advance();
      kind = "yield from";
      kids.push_back(parse_test());
    } else if (!at_statement_end() && !at_op(")") && !at_op("=")) {
      kids.push_back(parse_testlist_star());
    }
    return wrap(ExprKind::Yield, b, kind, std::move(kids));
  }

  // testlist_star_expr: produces a Tuple when a comma is present.
  Expr parse_testlist_star() {
    const auto b = cur().begin;
    auto first = parse_star_or_test();
    if (!at_op(",")) return first;
    std::vector<Expr> items;
    items.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (at_statement_end() || at_op("=") || at_op(")") || at_op(":") || at_op("]") ||
          (cur().kind == TokKind::Op && is_aug_op(cur().text)))
        break;
      items.push_back(parse_star_or_test());
    }
    return wrap(ExprKind::Tuple, b, "", std::move(items));
  }

  Expr parse_star_or_test() { return at_op("*") ? parse_star_expr() : parse_namedexpr_test(); }

  Expr parse_star_expr() {
    const auto b = cur().begin;
    auto op = std::string(advance().text);
    auto v = parse_bitor();
    return wrap(ExprKind::Starred, b, op, {std::move(v)});
  }

  // Targets of `for` / comprehensions: stops before `in`.
  Expr parse_target_list() {
    const auto b = cur().begin;
    auto first = parse_target();
    if (!at_op(",")) return first;
    std::vector<Expr> items;
    items.push_back(std::move(first));
    while (at_op(",")) {
      advance();
      if (at_kw("in") || at_op("=")) break;
      items.push_back(parse_target());
    }
    return wrap(ExprKind::Tuple, b, "", std::move(items));
  }

  Expr parse_target() { return at_op("*") ? parse_star_expr() : parse_bitor(); }

  Expr parse_namedexpr_test() {
    if (at(TokKind::Name) && peek().kind == TokKind::Op && peek().text == ":=") {
      const auto b = cur().begin;
      auto target = parse_atom();
      advance();
      auto value = parse_test();
      return wrap(ExprKind::NamedExpr, b, ":=", {std::move(target), std::move(value)});
    }
    return parse_test();
  }

  Expr parse_test() {
    if (at_kw("lambda")) return parse_lambda();
    const auto b = cur().begin;
    auto body = parse_or_test();
    if (at_kw("if")) {
      advance();
      auto test = parse_or_test();
      if (!at_kw("else")) fail("expected 'else' in conditional expression");
      advance();
      auto orelse = parse_test();
      return wrap(ExprKind::IfExp, b, "", {std::move(body), std::move(test), std::move(orelse)});
    }
    return body;
  }

  Expr parse_test_nocond() { return at_kw("lambda") ? parse_lambda() : parse_or_test(); }

  Expr parse_lambda() {
    const auto b = cur().begin;
    advance();
    parse_params(":");
    expect_op(":");
    auto body = parse_test();
    return wrap(ExprKind::Lambda, b, "", {std::move(body)});
  }

  Expr parse_or_test() {
    const auto b = cur().begin;
    auto first = parse_and_test();
    if (!at_kw("or")) return first;
    std::vector<Expr> items;
    items.push_back(std::move(first));
    while (at_kw("or")) {
      advance();
      items.push_back(parse_and_test());
    }
    return wrap(ExprKind::BoolOp, b, "or", std::move(items));
  }

  Expr parse_and_test() {
    const auto b = cur().begin;
    auto first = parse_not_test();
    if (!at_kw("and")) return first;
    std::vector<Expr> items;
    items.push_back(std::move(first));
    while (at_kw("and")) {
      advance();
      items.push_back(parse_not_test());
    }
    return wrap(ExprKind::BoolOp, b, "and", std::move(items));
  }

  Expr parse_not_test() {
    if (at_kw("not")) {
      const auto b = cur().begin;
      advance();
      auto operand = parse_not_test();
      return wrap(ExprKind::UnaryOp, b, "not", {std::move(operand)});
    }
    return parse_comparison();
  }

  std::optional<std::string> comparison_op() {
    if (cur().kind == TokKind::Op) {
      const auto t = cur().text;
      if (t == "<" || t == ">" || t == "==" || t == ">=" || t == "<=" || t == "!=" || t == "<>") {
        advance();
        return std::string(t);
      }
      return std::nullopt;
    }
    if (at_kw("in")) {
      advance();
      return "in";
    }
    if (at_kw("not") && peek().text == "in") {
      advance();
      advance();
      return "not in";
    }
    if (at_kw("is")) {
      advance();
      if (at_kw("not")) {
        advance();
        return "is not";
      }
      return "is";
    }
    return std::nullopt;
  }

  Expr parse_comparison() {
    const auto b = cur().begin;
    auto first = parse_bitor();
    auto op = comparison_op();
    if (!op) return first;
    Expr e;
    e.kind = ExprKind::Compare;
    e.children.push_back(std::move(first));
    while (op) {
      e.parts.push_back(*op);
      e.children.push_back(parse_bitor());
      op = comparison_op();
    }
    e.span = span_from(b);
    return e;
  }

  template <class Next>
  Expr parse_binary(std::initializer_list<std::string_view> ops, Next next) {
    const auto b = cur().begin;
    auto lhs = (this->*next)();
    while (cur().kind == TokKind::Op) {
      bool hit = false;
      for (auto op : ops) hit = hit || cur().text == op;
      if (!hit) break;
      auto op = std::string(advance().text);
      auto rhs = (this->*next)();
      lhs = wrap(ExprKind::BinOp, b, op, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr parse_bitor() { return parse_binary({"|"}, &Parser::parse_xor); }
  Expr parse_xor() { return parse_binary({"^"}, &Parser::parse_bitand); }
  Expr parse_bitand() { return parse_binary({"&"}, &Parser::parse_shift); }
  Expr parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
  Expr parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
  Expr parse_term() { return parse_binary({"*", "/", "//", "%", "@"}, &Parser::parse_factor); }

  Expr parse_factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      const auto b = cur().begin;
      auto op = std::string(advance().text);
      auto operand = parse_factor();
      return wrap(ExprKind::UnaryOp, b, op, {std::move(operand)});
    }
    return parse_power();
  }

  Expr parse_power() {
    const auto b = cur().begin;
    Expr base;
    if (at_kw("await")) {
      advance();
      auto operand = parse_primary();
      base = wrap(ExprKind::Await, b, "await", {std::move(operand)});
    } else {
      base = parse_primary();
    }
    if (at_op("**")) {
      advance();
      auto exp = parse_factor();
      return wrap(ExprKind::BinOp, b, "**", {std::move(base), std::move(exp)});
    }
    return base;
  }

  Expr parse_primary() {
    const auto b = cur().begin;
    auto e = parse_atom();
    while (true) {
      if (at_op(".")) {
        advance();
        auto attr = expect_name_or_keyword();
        e = wrap(ExprKind::Attribute, b, attr, {std::move(e)});
      } else if (at_op("(")) {
        advance();
        auto args = parse_call_args(")");
        expect_op(")");
        std::vector<Expr> kids;
        kids.push_back(std::move(e));
        for (auto& a : args) kids.push_back(std::move(a));
        e = wrap(ExprKind::Call, b, "", std::move(kids));
      } else if (at_op("[")) {
        advance();
        auto index = parse_subscript();
        expect_op("]");
        e = wrap(ExprKind::Subscript, b, "", {std::move(e), std::move(index)});
      } else {
        break;
      }
    }
    return e;
  }

  std::string expect_name_or_keyword() {
    // attribute names may not be keywords, but tolerate soft keywords
    if (!at(TokKind::Name)) fail("expected attribute name");
    return std::string(advance().text);
  }

  std::vector<Expr> parse_call_args(std::string_view close) {
    std::vector<Expr> args;
    while (!at_op(close)) {
      const auto b = cur().begin;
      if (at_op("*") || at_op("**")) {
        auto op = std::string(advance().text);
        auto v = parse_test();
        args.push_back(wrap(ExprKind::Starred, b, op, {std::move(v)}));
      } else if (at(TokKind::Name) && peek().kind == TokKind::Op && peek().text == "=") {
        auto name = std::string(advance().text);
        advance();
        auto v = parse_test();
        args.push_back(wrap(ExprKind::Keyword, b, std::move(name), {std::move(v)}));
      } else {
        auto v = parse_namedexpr_test();
        if (at_kw("for") || at_kw("async")) v = parse_comprehension(b, "gen", std::move(v), std::nullopt);
        args.push_back(std::move(v));
      }
      if (!at_op(",")) break;
      advance();
    }
    return args;
  }

  Expr parse_subscript() {
    const auto b = cur().begin;
    std::vector<Expr> items;
    bool tuple = false;
    while (true) {
      items.push_back(parse_slice_item());
      if (!at_op(",")) break;
      tuple = true;
      advance();
      if (at_op("]")) break;
    }
    if (!tuple) return std::move(items.front());
    return wrap(ExprKind::Tuple, b, "", std::move(items));
  }

  Expr parse_slice_item() {
    const auto b = cur().begin;
    std::vector<Expr> parts;
    bool is_slice = false;
    if (!at_op(":")) parts.push_back(parse_star_or_test());
    while (at_op(":")) {
      is_slice = true;
      advance();
      if (!at_op(":") && !at_op("]") && !at_op(",")) parts.push_back(parse_test());
    }
    if (!is_slice) return std::move(parts.front());
    return wrap(ExprKind::Slice, b, "", std::move(parts));
  }

  Expr parse_comprehension(std::size_t b, std::string kind, Expr elt, std::optional<Expr> value) {
    std::vector<Expr> kids;
    kids.push_back(std::move(elt));
    if (value) kids.push_back(std::move(*value));
    while (at_kw("for") || at_kw("async")) {
      if (at_kw("async")) advance();
      if (!at_kw("for")) fail("expected 'for'");
      advance();
      kids.push_back(parse_target_list());
      if (!at_kw("in")) fail("expected 'in'");
      advance();
      kids.push_back(parse_or_test());
      while (at_kw("if")) {
        advance();
        kids.push_back(parse_test_nocond());
      }
    }
    return wrap(ExprKind::Comprehension, b, std::move(kind), std::move(kids));
  }

  Expr parse_atom() {
    const auto b = cur().begin;
    const auto& t = cur();
    switch (t.kind) {
      case TokKind::Name: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          auto text = std::string(advance().text);
          return wrap(ExprKind::Constant, b, std::move(text), {});
        }
        if (detail::is_keyword(t.text)) fail("unexpected keyword '" + std::string(t.text) + "'");
        auto text = std::string(advance().text);
        return wrap(ExprKind::Name, b, std::move(text), {});
      }
      case TokKind::Number: {
        auto text = std::string(advance().text);
        return wrap(ExprKind::Number, b, std::move(text), {});
      }
      case TokKind::String: return parse_strings();
      case TokKind::Op: break;
      default: fail("unexpected end of expression");
    }
    if (at_op("...")) {
      advance();
      return wrap(ExprKind::Ellipsis, b, "...", {});
    }
    if (at_op("(")) {
      advance();
      if (at_op(")")) {
        advance();
        return wrap(ExprKind::Tuple, b, "", {});
      }
      if (at_kw("yield")) {
        auto y = parse_yield();
        expect_op(")");
        return y;
      }
      auto first = parse_star_or_test();
      if (at_kw("for") || at_kw("async")) {
        auto comp = parse_comprehension(b, "gen", std::move(first), std::nullopt);
        expect_op(")");
        comp.span = span_from(b);
        return comp;
      }
      if (at_op(")")) {
        advance();
        return first;
      }
      std::vector<Expr> items;
      items.push_back(std::move(first));
      while (at_op(",")) {
        advance();
        if (at_op(")")) break;
        items.push_back(parse_star_or_test());
      }
      expect_op(")");
      return wrap(ExprKind::Tuple, b, "", std::move(items));
    }
    if (at_op("[")) {
      advance();
      std::vector<Expr> items;
      if (!at_op("]")) {
        auto first = parse_star_or_test();
        if (at_kw("for") || at_kw("async")) {
          auto comp = parse_comprehension(b, "list", std::move(first), std::nullopt);
          expect_op("]");
          comp.span = span_from(b);
          return comp;
        }
        items.push_back(std::move(first));
        while (at_op(",")) {
          advance();
          if (at_op("]")) break;
          items.push_back(parse_star_or_test());
        }
      }
      expect_op("]");
      return wrap(ExprKind::List, b, "", std::move(items));
    }
    if (at_op("{")) {
      advance();
      if (at_op("}")) {
        advance();
        return wrap(ExprKind::Dict, b, "", {});
      }
      std::vector<Expr> items;
      bool is_dict = false;
      auto parse_dict_item = [&] {
        if (at_op("**")) {
          const auto sb = cur().begin;
          advance();
          auto v = parse_bitor();
          items.push_back(wrap(ExprKind::Starred, sb, "**", {std::move(v)}));
          return;
        }
        items.push_back(parse_test());
        expect_op(":");
        items.push_back(parse_test());
      };
      if (at_op("**")) {
        is_dict = true;
        parse_dict_item();
      } else {
        auto first = parse_star_or_test();
        if (at_op(":")) {
          is_dict = true;
          advance();
          auto value = parse_test();
          if (at_kw("for") || at_kw("async")) {
            auto comp = parse_comprehension(b, "dict", std::move(first), std::move(value));
            expect_op("}");
            comp.span = span_from(b);
            return comp;
          }
          items.push_back(std::move(first));
          items.push_back(std::move(value));
        } else {
          if (at_kw("for") || at_kw("async")) {
            auto comp = parse_comprehension(b, "set", std::move(first), std::nullopt);
            expect_op("}");
            comp.span = span_from(b);
            return comp;
          }
          items.push_back(std::move(first));
        }
      }
      while (at_op(",")) {
        advance();
        if (at_op("}")) break;
        if (is_dict) parse_dict_item();
        else items.push_back(parse_star_or_test());
      }
      expect_op("}");
      return wrap(is_dict ? ExprKind::Dict : ExprKind::Set, b, "", std::move(items));
    }
    fail("unexpected '" + std::string(t.text) + "'");
  }

  Expr parse_strings() {
    const auto b = cur().begin;
    Expr e;
    e.kind = ExprKind::String;
    while (at(TokKind::String)) {
      const auto t = advance();
      const auto body = src_.substr(t.body_begin, t.body_end - t.body_begin);
      if (t.fstring) {
        e.fstring = true;
        split_fstring(t, body, e);
      } else {
        auto decoded = t.raw ? std::string(body) : decode_escapes(body);
        e.value += decoded;
        e.parts.push_back(std::move(decoded));
      }
    }
    e.span = span_from(b);
    return e;
  }

  // Splits an f-string body into literal fragments (appended to e.parts and
  // e.value) and replacement-field expressions (appended to e.children).
  void split_fstring(const Token& t, std::string_view body, Expr& e) {
    std::string literal;
    auto flush = [&] {
      if (literal.empty()) return;
      auto decoded = t.raw ? literal : decode_escapes(literal);
      e.value += decoded;
      e.parts.push_back(std::move(decoded));
      literal.clear();
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
      const char c = body[i];
      if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
        literal.push_back('{');
        ++i;
        continue;
      }
      if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
        literal.push_back('}');
        ++i;
        continue;
      }
      if (c != '{') {
        literal.push_back(c);
        continue;
      }
      flush();
      // find the end of the expression part and of the whole field
      int depth = 0;
      std::size_t j = i + 1;
      std::size_t expr_end = std::string_view::npos;
      char quote = 0;
      for (; j < body.size(); ++j) {
        const char d = body[j];
        if (quote) {
          if (d == quote) quote = 0;
          continue;
        }
        if (d == '\'' || d == '"') quote = d;
        else if (d == '(' || d == '[' || d == '{') ++depth;
        else if ((d == ')' || d == ']' || d == '}') && depth > 0) --depth;
        else if (depth == 0 && d == '}') break;
        else if (depth == 0 && expr_end == std::string_view::npos &&
                 ((d == '!' && j + 1 < body.size() && body[j + 1] != '=') || d == ':' ||
                  (d == '=' && j + 1 < body.size() && (body[j + 1] == '}' || body[j + 1] == '!' || body[j + 1] == ':') &&
                   body[j - 1] != '=' && body[j - 1] != '!' && body[j - 1] != '<' && body[j - 1] != '>'))) {
          expr_end = j;
        }
      }
      if (expr_end == std::string_view::npos) expr_end = j;
      const auto abs_begin = t.body_begin + i + 1;
      const auto abs_end = t.body_begin + expr_end;
      try {
        Tokenizer sub(src_, file_, lines_, abs_begin, abs_end, true);
        Parser p(src_, file_, lines_, sub.run());
        e.children.push_back(p.parse_expression_only());
      } catch (const detail::ParseFailure&) {
        Expr opaque;
        opaque.kind = ExprKind::Opaque;
        opaque.span = Span{abs_begin, abs_end, lines_.line_of(abs_begin), lines_.line_of(abs_end)};
        e.children.push_back(std::move(opaque));
      } catch (const SyntaxError&) {
        Expr opaque;
        opaque.kind = ExprKind::Opaque;
        opaque.span = Span{abs_begin, abs_end, lines_.line_of(abs_begin), lines_.line_of(abs_end)};
        e.children.push_back(std::move(opaque));
      }
      i = j;
    }
    flush();
  }

  std::string_view src_;
  std::string file_;
  const text::LineIndex& lines_;
  std::vector<Token> toks_;
  std::size_t idx_ = 0;
  std::size_t last_end_ = 0;
};

// Parses one file. Throws SyntaxError for lexical and block-structure
// errors; statements outside the supported grammar become Opaque nodes.
inline AstUnit parse_source(std::string_view text, const std::string& path, const text::LineIndex& lines) {
  Tokenizer tok(text, path, lines, 0, text.size());
  Parser parser(text, path, lines, tok.run());
  AstUnit unit;
  unit.file = path;
  unit.body = parser.parse_module();
  return unit;
}

}  // namespace agentlint::py
