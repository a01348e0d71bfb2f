#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agentlint::py {

// Byte range [begin, end) inside one file plus the 1-based lines it covers.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::uint32_t line_start = 0;
  std::uint32_t line_end = 0;

  bool contains(const Span& o) const { return begin <= o.begin && o.end <= end; }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class ExprKind {
  Name,
  Attribute,
  Call,
  Subscript,
  Slice,
  String,
  Number,
  Constant,  // None / True / False
  Ellipsis,
  List,
  Tuple,
  Set,
  Dict,
  BinOp,
  UnaryOp,
  BoolOp,
  Compare,
  IfExp,
  Lambda,
  Starred,
  Keyword,
  Await,
  Yield,
  Comprehension,
  NamedExpr,
  Opaque,
};

// Child layout per kind:
//   Attribute [value]            text = attribute name
//   Call      [callee, args...]  keyword args are Keyword nodes, *a / **k are Starred
//   Subscript [value, index]
//   String    [placeholders...]  f-string replacement fields; parts = literal fragments
//   Compare   [operands...]      parts = operators
//   IfExp     [body, test, orelse]
//   Dict      [k0, v0, k1, v1, ...] with Starred("**") standing in for a key/value pair
struct Expr {
  ExprKind kind = ExprKind::Opaque;
  Span span;
  std::string text;
  std::string value;
  std::vector<std::string> parts;
  bool fstring = false;
  std::vector<Expr> children;

  const Expr& child(std::size_t i) const { return children.at(i); }
};

enum class StmtKind {
  ClassDef,
  FunctionDef,
  Return,
  Assign,
  AnnAssign,
  AugAssign,
  ExprStmt,
  Import,
  ImportFrom,
  If,
  While,
  For,
  Try,
  With,
  Assert,
  Raise,
  Pass,
  Break,
  Continue,
  Opaque,
};

struct Param {
  std::string name;
  std::string star;  // "", "*" or "**"
  std::optional<Expr> annotation;
  std::optional<Expr> default_value;
  Span span;
};

struct ImportAlias {
  std::string name;
  std::string asname;

  friend bool operator==(const ImportAlias&, const ImportAlias&) = default;
};

struct ExceptHandler;

struct Stmt {
  StmtKind kind = StmtKind::Opaque;
  Span span;
  // ClassDef/FunctionDef name; ImportFrom module; AugAssign operator;
  // Opaque leading keyword (or empty).
  std::string name;
  bool is_async = false;
  std::uint32_t level = 0;  // leading dots of a relative import
  std::vector<Expr> decorators;
  std::vector<Expr> bases;
  std::vector<Param> params;
  std::optional<Expr> returns;
  std::vector<Expr> targets;
  // Assign/AnnAssign/AugAssign value, Return value, ExprStmt expression,
  // If/While/Assert test, For iterable, Raise exception.
  std::optional<Expr> value;
  std::optional<Expr> annotation;
  std::vector<Expr> exprs;  // With items, Assert message, opaque payload
  std::vector<ImportAlias> names;
  std::vector<Stmt> body;
  std::vector<Stmt> orelse;
  std::vector<Stmt> finalbody;
  std::vector<ExceptHandler> handlers;
};

struct ExceptHandler {
  Span span;
  std::optional<Expr> type;
  std::string name;
  std::vector<Stmt> body;
};

struct AstUnit {
  std::string file;
  std::vector<Stmt> body;
};

// --- traversal helpers -------------------------------------------------

// Calls fn on every expression reachable from e (pre-order, e included).
inline void walk_expr(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& c : e.children) walk_expr(c, fn);
}

// Expressions owned directly by a statement (not by nested statements), in
// source order.
inline std::vector<const Expr*> own_exprs(const Stmt& s) {
  std::vector<const Expr*> out;
  for (const auto& d : s.decorators) out.push_back(&d);
  for (const auto& b : s.bases) out.push_back(&b);
  for (const auto& p : s.params) {
    if (p.annotation) out.push_back(&*p.annotation);
    if (p.default_value) out.push_back(&*p.default_value);
  }
  if (s.returns) out.push_back(&*s.returns);
  if (s.kind == StmtKind::For) {
    for (const auto& t : s.targets) out.push_back(&t);
    if (s.value) out.push_back(&*s.value);
  } else {
    for (const auto& t : s.targets) out.push_back(&t);
    if (s.annotation) out.push_back(&*s.annotation);
    if (s.value) out.push_back(&*s.value);
  }
  for (const auto& x : s.exprs) out.push_back(&x);
  for (const auto& h : s.handlers) {
    if (h.type) out.push_back(&*h.type);
  }
  return out;
}

// Pre-order statement walk. When descend_defs is false, bodies of nested
// class/function definitions are not entered (the definition itself is
// still visited).
inline void walk_stmts(const std::vector<Stmt>& body, const std::function<void(const Stmt&)>& fn,
                       bool descend_defs = true) {
  for (const auto& s : body) {
    fn(s);
    const bool is_def = s.kind == StmtKind::ClassDef || s.kind == StmtKind::FunctionDef;
    if (is_def && !descend_defs) continue;
    walk_stmts(s.body, fn, descend_defs);
    for (const auto& h : s.handlers) walk_stmts(h.body, fn, descend_defs);
    walk_stmts(s.orelse, fn, descend_defs);
    walk_stmts(s.finalbody, fn, descend_defs);
  }
}

// "a.b.c" for Name/Attribute chains, empty otherwise.
inline std::string dotted_name(const Expr& e) {
  if (e.kind == ExprKind::Name) return e.text;
  if (e.kind == ExprKind::Attribute) {
    auto base = dotted_name(e.children.front());
    return base.empty() ? std::string{} : base + "." + e.text;
  }
  return {};
}

// Syntactic path of a callee: subscripts render as "[]" and intermediate
// calls as "()", e.g. "self.tool_by_names[].use".
inline std::string callee_path(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Name: return e.text;
    case ExprKind::Attribute: return callee_path(e.children.front()) + "." + e.text;
    case ExprKind::Subscript: return callee_path(e.children.front()) + "[]";
    case ExprKind::Call: return callee_path(e.children.front()) + "()";
    default: return "<expr>";
  }
}

inline std::string_view callee_short_name(const Expr& call) {
  const auto& callee = call.children.front();
  if (callee.kind == ExprKind::Name || callee.kind == ExprKind::Attribute) return callee.text;
  return {};
}

inline const Expr* keyword_arg(const Expr& call, std::string_view name) {
  for (std::size_t i = 1; i < call.children.size(); ++i) {
    const auto& a = call.children[i];
    if (a.kind == ExprKind::Keyword && a.text == name) return &a.children.front();
  }
  return nullptr;
}

inline bool is_docstring(const Stmt& s) {
  return s.kind == StmtKind::ExprStmt && s.value && s.value->kind == ExprKind::String && !s.value->fstring;
}

}  // namespace agentlint::py
