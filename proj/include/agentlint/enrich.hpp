#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentlint/cpg.hpp"
#include "agentlint/markers.hpp"
#include "agentlint/unrt.hpp"

namespace agentlint {

// --- snippets ------------------------------------------------------------

struct SourceSnippet {
  std::string file;
  LineSpan span;
  py::Span bytes;
  std::string text;
  std::string enclosing_qualname;

  friend bool operator==(const SourceSnippet&, const SourceSnippet&) = default;
};

namespace detail {

inline void check_fresh(const SourceFile& f) {
  if (!f.disk) return;
  std::error_code ec;
  const auto& d = *f.disk;
  if (!std::filesystem::exists(d.absolute, ec)) {
    throw Error(ErrorCode::StaleSpan, f.path + " no longer exists");
  }
  const auto size = std::filesystem::file_size(d.absolute, ec);
  const auto mtime = std::filesystem::last_write_time(d.absolute, ec);
  if (ec || size != d.size || mtime != d.mtime) throw Error(ErrorCode::StaleSpan, f.path + " changed since it was parsed");
}

}  // namespace detail

inline SourceSnippet snippet_of_span(const CodePropertyGraph& g, std::size_t unit, const py::Span& span,
                                     std::string qualname = {}) {
  SourceSnippet s;
  s.enclosing_qualname = std::move(qualname);
  if (!g.has_ast() || unit >= g.project().snapshot->files.size()) return s;
  const auto& f = g.project().snapshot->files[unit];
  detail::check_fresh(f);
  s.file = f.path;
  s.span = {span.line_start, span.line_end};
  s.bytes = span;
  if (span.end > f.text.size() || span.begin > span.end) throw Error(ErrorCode::StaleSpan, "span outside " + f.path);
  s.text = f.text.substr(span.begin, span.end - span.begin);
  return s;
}

// Exact source of a node. Definitions carry their own qualified name,
// everything else the name of the definition holding it.
inline SourceSnippet snippet(const CodePropertyGraph& g, NodeId id) {
  const auto& n = g.node(id);
  if (!g.has_ast() || g.meta(id).stub || g.meta(id).package) return SourceSnippet{n.file, n.span, {}, {}, n.name};
  const auto& ref = g.ast(id);
  std::string qual;
  if (n.kind == NodeKind::Class || n.kind == NodeKind::Function) qual = n.name;
  else if (g.meta(id).owner != kNoNode) qual = g.node(g.meta(id).owner).name;
  return snippet_of_span(g, ref.unit, ref.span, qual);
}

inline SourceSnippet snippet(const CodePropertyGraph& g, const UnifiedNode& u) { return snippet(g, u.graph_id); }

// --- attribute facts -----------------------------------------------------

enum class InitKind { String, Number, None, Bool, NonLiteral, Missing };

inline std::string_view to_string(InitKind k) {
  switch (k) {
    case InitKind::String: return "string";
    case InitKind::Number: return "number";
    case InitKind::None: return "none";
    case InitKind::Bool: return "bool";
    case InitKind::NonLiteral: return "NonLiteral";
    case InitKind::Missing: return "Missing";
  }
  return "?";
}

struct AttributeFact {
  std::string class_qualname;
  std::string name;
  InitKind kind = InitKind::Missing;
  std::string value;       // literal text (string contents, number text, None/True/False)
  std::string value_type;  // str/int/float/NoneType/bool, else the annotation or "unknown"
  std::uint32_t line = 0;
  const py::Expr* expr = nullptr;  // initializer, null when Missing

  bool is_literal() const { return kind != InitKind::NonLiteral && kind != InitKind::Missing; }
};

namespace detail {

// pydantic/dataclass style Field(default=...) wrappers
inline const py::Expr* unwrap_field(const py::Expr& e) {
  if (e.kind != py::ExprKind::Call) return &e;
  const auto callee = std::string(text::last_component(py::dotted_name(e.children.front())));
  if (callee != "Field" && callee != "field") return &e;
  if (const auto* d = py::keyword_arg(e, "default")) return d;
  if (e.children.size() > 1 && e.children[1].kind != py::ExprKind::Keyword && e.children[1].kind != py::ExprKind::Starred)
    return &e.children[1];
  return &e;
}

inline void classify_literal(const py::Expr& e, AttributeFact& f) {
  using py::ExprKind;
  switch (e.kind) {
    case ExprKind::String:
      if (e.fstring && !e.children.empty()) break;
      f.kind = InitKind::String;
      f.value = e.value;
      f.value_type = "str";
      return;
    case ExprKind::Number:
      f.kind = InitKind::Number;
      f.value = e.text;
      f.value_type = e.text.find_first_of(".eE") != std::string::npos && !e.text.starts_with("0x") ? "float" : "int";
      return;
    case ExprKind::Constant:
      f.value = e.text;
      if (e.text == "None") {
        f.kind = InitKind::None;
        f.value_type = "NoneType";
      } else {
        f.kind = InitKind::Bool;
        f.value_type = "bool";
      }
      return;
    case ExprKind::UnaryOp:
      if (!e.children.empty() && e.children.front().kind == ExprKind::Number) {
        classify_literal(e.children.front(), f);
        f.value = e.text + f.value;
        return;
      }
      break;
    default: break;
  }
  f.kind = InitKind::NonLiteral;
}

}  // namespace detail

inline std::vector<AttributeFact> attribute_facts(const CodePropertyGraph& g, NodeId class_id) {
  if (g.node(class_id).kind != NodeKind::Class) {
    throw Error(ErrorCode::PreconditionViolation, "attribute_facts: " + g.node(class_id).name + " is not a class");
  }
  std::vector<AttributeFact> out;
  if (!g.has_ast()) return out;
  const auto* cls = g.ast(class_id).stmt;
  for (const auto& s : cls->body) {
    if (s.kind != py::StmtKind::Assign && s.kind != py::StmtKind::AnnAssign) continue;
    for (const auto& t : s.targets) {
      if (t.kind != py::ExprKind::Name) continue;
      AttributeFact f;
      f.class_qualname = g.node(class_id).name;
      f.name = t.text;
      f.line = s.span.line_start;
      const std::string annotated = s.annotation ? py::dotted_name(*s.annotation) : std::string{};
      if (!s.value) {
        f.kind = InitKind::Missing;
        f.value_type = annotated.empty() ? "unknown" : annotated;
      } else {
        const auto* v = detail::unwrap_field(*s.value);
        f.expr = v;
        detail::classify_literal(*v, f);
        if (f.kind == InitKind::NonLiteral) f.value_type = annotated.empty() ? "unknown" : annotated;
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

// --- graph helpers shared by the oracles ----------------------------------

inline std::vector<NodeId> methods_of(const CodePropertyGraph& g, NodeId class_id) {
  std::vector<NodeId> out;
  for (auto t : g.targets(class_id, EdgeKind::Contains)) {
    if (g.node(t).kind == NodeKind::Function && g.meta(t).owner == class_id) out.push_back(t);
  }
  return out;
}

// Project ancestors of a class in breadth-first order, the class excluded.
inline std::vector<NodeId> ancestors_of(const CodePropertyGraph& g, NodeId class_id) {
  std::vector<NodeId> out;
  std::set<NodeId> seen{class_id};
  std::vector<NodeId> frontier{class_id};
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (auto c : frontier) {
      for (auto b : g.targets(c, EdgeKind::Inherits)) {
        if (seen.insert(b).second) {
          out.push_back(b);
          next.push_back(b);
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

inline std::optional<NodeId> find_method(const CodePropertyGraph& g, NodeId class_id, std::string_view name) {
  std::vector<NodeId> chain{class_id};
  for (auto a : ancestors_of(g, class_id)) chain.push_back(a);
  for (auto c : chain) {
    for (auto m : methods_of(g, c)) {
      if (g.meta(m).short_name == name) return m;
    }
  }
  return std::nullopt;
}

inline const std::vector<py::Stmt>* body_of(const CodePropertyGraph& g, NodeId def, std::size_t unit) {
  if (!g.has_ast()) return nullptr;
  if (def == kNoNode) return unit < g.project().units.size() ? &g.project().units[unit].body : nullptr;
  const auto* s = g.ast(def).stmt;
  return s ? &s->body : nullptr;
}

// Source text of a statement, single line, trimmed; used to render guards.
inline std::string stmt_head(const CodePropertyGraph& g, std::size_t unit, const py::Span& span) {
  const auto& text = g.project().snapshot->files.at(unit).text;
  auto piece = std::string_view(text).substr(span.begin, span.end - span.begin);
  piece = piece.substr(0, piece.find('\n'));
  return std::string(text::trim(piece));
}

// --- literal resolution --------------------------------------------------

struct LiteralSet {
  std::set<std::string> values;
  bool incomplete = false;
  bool truncated = false;

  void merge(const LiteralSet& o) {
    values.insert(o.values.begin(), o.values.end());
    incomplete |= o.incomplete;
    truncated |= o.truncated;
  }
};

// Scope of a resolution: a definition node (function or class) or the
// module of `unit` when def is kNoNode.
struct ResolveScope {
  NodeId def = kNoNode;
  std::size_t unit = 0;
};

class LiteralResolver {
 public:
  LiteralResolver(const CodePropertyGraph& g, std::uint32_t depth_cap = 8) : g_(g), cap_(depth_cap) {}

  // Scope holding a graph node (its direct lexical container).
  ResolveScope scope_of(NodeId id) const { return {g_.meta(id).owner, g_.ast(id).unit}; }

  LiteralSet resolve(const py::Expr& e, ResolveScope scope) const {
    Path path;
    return expr(e, scope, 0, path, false);
  }

  LiteralSet resolve_name(const std::string& name, ResolveScope scope, std::size_t pos = std::string::npos) const {
    Path path;
    return lookup(name, scope, pos, 0, path, false);
  }

  // Values an attribute of `cls` can hold (class body, self.X = ..., bases).
  LiteralSet resolve_attr(NodeId cls, const std::string& attr) const {
    Path path;
    return class_attr(cls, attr, 0, path, false);
  }

 private:
  struct PathKey {
    std::size_t scope;
    std::string name;
    std::size_t pos;
    friend bool operator==(const PathKey&, const PathKey&) = default;
  };
  using Path = std::vector<PathKey>;  // lookups along the current chain

  static std::size_t key(ResolveScope s) { return s.def == kNoNode ? (std::size_t{1} << 40) + s.unit : s.def; }

  LiteralSet expr(const py::Expr& e, ResolveScope scope, std::uint32_t depth, Path& path, bool hopped) const {
    using py::ExprKind;
    LiteralSet out;
    switch (e.kind) {
      case ExprKind::String:
        if (!e.fstring) {
          out.values.insert(e.value);
          return out;
        }
        for (const auto& p : e.parts) {
          if (!p.empty()) out.values.insert(p);
        }
        for (const auto& c : e.children) out.merge(expr(c, scope, depth, path, hopped));
        if (!e.children.empty()) out.incomplete = true;
        return out;
      case ExprKind::Number:
      case ExprKind::Constant:
        return out;
      case ExprKind::List:
      case ExprKind::Tuple:
      case ExprKind::Set:
      case ExprKind::BinOp:
      case ExprKind::BoolOp:
        for (const auto& c : e.children) out.merge(expr(c, scope, depth, path, hopped));
        return out;
      case ExprKind::IfExp:
        out.merge(expr(e.children[0], scope, depth, path, hopped));
        out.merge(expr(e.children[2], scope, depth, path, hopped));
        return out;
      case ExprKind::Starred:
      case ExprKind::Keyword:
        return expr(e.children.front(), scope, depth, path, hopped);
      case ExprKind::Name:
        return lookup(e.text, scope, e.span.begin, depth, path, hopped);
      case ExprKind::Attribute: {
        const auto n = py::dotted_name(e);
        if (n.empty()) break;
        const auto root = std::string(text::first_component(n));
        const auto rest = n.substr(root.size() + 1);
        if (rest.find('.') != std::string::npos) break;
        if (root == "self" || root == "cls") return self_attr(rest, scope, depth, path, hopped);
        if (auto c = class_named(root, scope.unit)) return class_attr(*c, rest, depth, path, hopped);
        break;
      }
      default: break;
    }
    out.incomplete = true;
    return out;
  }

  bool enter(ResolveScope scope, const std::string& name, std::size_t pos, std::uint32_t depth, Path& path,
             LiteralSet& out) const {
    if (depth >= cap_) {
      out.truncated = true;
      out.incomplete = true;
      return false;
    }
    const auto k = PathKey{key(scope), name, pos};
    if (std::find(path.begin(), path.end(), k) != path.end()) return false;  // cycle: contributes nothing new
    path.push_back(k);
    return true;
  }

  // Assignments binding `name` inside a scope body (nested definitions
  // excluded). pos is where the binding takes effect: the end of the
  // assignment, or the end of a for-loop's iterable.
  struct Binding {
    const py::Expr* value;  // null for an unsupported destructuring
    std::size_t pos;
  };

  static void bindings_in(const std::vector<py::Stmt>& body, const std::string& name, std::vector<Binding>& out) {
    py::walk_stmts(
        body,
        [&](const py::Stmt& s) {
          if (s.kind == py::StmtKind::Assign || s.kind == py::StmtKind::AnnAssign) {
            if (!s.value) return;
            for (const auto& t : s.targets) {
              if (t.kind == py::ExprKind::Name && t.text == name) {
                out.push_back({&*s.value, s.span.end});
              } else if (t.kind == py::ExprKind::Tuple || t.kind == py::ExprKind::List) {
                for (std::size_t i = 0; i < t.children.size(); ++i) {
                  if (t.children[i].kind != py::ExprKind::Name || t.children[i].text != name) continue;
                  const bool same_shape = (s.value->kind == py::ExprKind::Tuple || s.value->kind == py::ExprKind::List) &&
                                          s.value->children.size() == t.children.size();
                  out.push_back({same_shape ? &s.value->children[i] : nullptr, s.span.end});
                }
              }
            }
          } else if (s.kind == py::StmtKind::AugAssign && !s.targets.empty() &&
                     s.targets.front().kind == py::ExprKind::Name && s.targets.front().text == name && s.value) {
            out.push_back({&*s.value, s.span.end});
          } else if (s.kind == py::StmtKind::For && !s.targets.empty() && s.targets.front().kind == py::ExprKind::Name &&
                     s.targets.front().text == name && s.value) {
            // iterating a literal collection binds each element
            out.push_back({&*s.value, s.value->span.end});
          }
        },
        false);
  }

  LiteralSet lookup(const std::string& name, ResolveScope scope, std::size_t pos, std::uint32_t depth, Path& path,
                    bool hopped) const {
    LiteralSet out;
    if (!enter(scope, name, pos, depth, path, out)) return out;
    resolve_in_scopes(name, scope, pos, depth, path, hopped, out);
    path.pop_back();
    return out;
  }

  void resolve_in_scopes(const std::string& name, ResolveScope scope, std::size_t pos, std::uint32_t depth, Path& path,
                         bool hopped, LiteralSet& out) const {
    // innermost scope outward; class bodies never scope over nested code
    for (ResolveScope s = scope;;) {
      const bool innermost = s.def == scope.def;
      const auto* body = body_of(g_, s.def, s.unit);
      std::vector<Binding> found;
      if (body) bindings_in(*body, name, found);
      std::vector<Binding> before;
      for (const auto& b : found) {
        if (!innermost || b.pos <= pos) before.push_back(b);
      }
      const bool is_fn = s.def != kNoNode && g_.node(s.def).kind == NodeKind::Function;
      const auto p = is_fn ? param(s.def, name) : std::nullopt;
      if (!before.empty()) {
        for (const auto& b : before) {
          if (b.value) out.merge(expr(*b.value, s, depth + 1, path, hopped));
          else out.incomplete = true;
        }
        return;
      }
      if (p) {
        out.merge(from_param(s.def, *p, depth, path, hopped));
        return;
      }
      if (!found.empty()) {  // only later bindings (loops, conditional init)
        for (const auto& b : found) {
          if (b.value) out.merge(expr(*b.value, s, depth + 1, path, hopped));
          else out.incomplete = true;
        }
        return;
      }
      if (s.def == kNoNode) break;
      NodeId up = g_.meta(s.def).owner;
      while (up != kNoNode && g_.node(up).kind == NodeKind::Class) up = g_.meta(up).owner;
      s = ResolveScope{up, s.unit};
    }
    if (auto imported = imported_constant(name, scope.unit)) {
      out.merge(lookup(imported->second, ResolveScope{kNoNode, imported->first}, std::string::npos, depth + 1, path,
                       hopped));
      return;
    }
    out.incomplete = true;
  }

  std::optional<std::size_t> param(NodeId fn, const std::string& name) const {
    const auto* s = g_.ast(fn).stmt;
    for (std::size_t i = 0; i < s->params.size(); ++i) {
      if (s->params[i].name == name) return i;
    }
    return std::nullopt;
  }

  // Default value plus one interprocedural hop to the arguments of each
  // resolved call site.
  LiteralSet from_param(NodeId fn, std::size_t index, std::uint32_t depth, Path& path, bool hopped) const {
    LiteralSet out;
    const auto* def = g_.ast(fn).stmt;
    const auto& p = def->params[index];
    const auto fn_scope = ResolveScope{fn, g_.ast(fn).unit};
    if (p.default_value) out.merge(expr(*p.default_value, ResolveScope{g_.meta(fn).owner, fn_scope.unit}, depth + 1, path, hopped));
    if (!p.star.empty()) {
      out.incomplete = true;
      return out;
    }
    bool any_site = false;
    if (!hopped) {
      const bool bound_first =
          !def->params.empty() && (def->params[0].name == "self" || def->params[0].name == "cls") &&
          g_.meta(fn).owner != kNoNode && g_.node(g_.meta(fn).owner).kind == NodeKind::Class;
      for (auto ei : g_.in_edges(fn)) {
        if (g_.edges()[ei].kind != EdgeKind::Calls) continue;
        const auto site = g_.call_site(ei);
        if (site == kNoNode) continue;
        const auto* call = g_.ast(site).expr;
        if (!call) continue;
        const auto* arg = argument_for(*call, *def, index, bound_first);
        if (!arg) continue;
        any_site = true;
        out.merge(expr(*arg, scope_of(site), depth + 1, path, true));
      }
    }
    if (!any_site && !p.default_value) out.incomplete = true;
    return out;
  }

  const py::Expr* argument_for(const py::Expr& call, const py::Stmt& def, std::size_t index, bool bound_first) const {
    const auto& pname = def.params[index].name;
    if (const auto* kw = py::keyword_arg(call, pname)) return kw;
    std::size_t offset = 0;
    if (bound_first) {
      // Class.method(obj, ...) passes self explicitly
      const auto& callee = call.children.front();
      bool explicit_self = false;
      if (callee.kind == py::ExprKind::Attribute) {
        const auto base = py::dotted_name(callee.children.front());
        explicit_self = !base.empty() && base != "self" && base != "cls" &&
                        std::isupper(static_cast<unsigned char>(base[0])) && callee.text != "__init__";
      }
      if (!explicit_self) offset = 1;
    }
    if (index < offset) return nullptr;
    std::size_t pos = 0;
    for (std::size_t i = 1; i < call.children.size(); ++i) {
      const auto& a = call.children[i];
      if (a.kind == py::ExprKind::Keyword || a.kind == py::ExprKind::Starred) continue;
      if (pos == index - offset) return &a;
      ++pos;
    }
    return nullptr;
  }

  std::optional<NodeId> enclosing_class(ResolveScope scope) const {
    NodeId d = scope.def;
    while (d != kNoNode && g_.node(d).kind != NodeKind::Class) d = g_.meta(d).owner;
    if (d == kNoNode) return std::nullopt;
    return d;
  }

  LiteralSet self_attr(const std::string& attr, ResolveScope scope, std::uint32_t depth, Path& path, bool hopped) const {
    auto cls = enclosing_class(scope);
    if (!cls) {
      LiteralSet out;
      out.incomplete = true;
      return out;
    }
    return class_attr(*cls, attr, depth, path, hopped);
  }

  // Class-body bindings along the hierarchy plus `self.attr = ...` in methods.
  LiteralSet class_attr(NodeId cls, const std::string& attr, std::uint32_t depth, Path& path, bool hopped) const {
    LiteralSet out;
    const auto unit = g_.ast(cls).unit;
    if (!enter(ResolveScope{cls, unit}, "self." + attr, std::string::npos, depth, path, out)) return out;
    std::vector<NodeId> chain{cls};
    for (auto a : ancestors_of(g_, cls)) chain.push_back(a);
    bool found = false;
    for (auto c : chain) {
      const auto c_scope = ResolveScope{c, g_.ast(c).unit};
      std::vector<Binding> body;
      bindings_in(g_.ast(c).stmt->body, attr, body);
      for (const auto& b : body) {
        found = true;
        if (b.value) out.merge(expr(*b.value, c_scope, depth + 1, path, hopped));
        else out.incomplete = true;
      }
      for (auto m : methods_of(g_, c)) {
        const auto m_scope = ResolveScope{m, g_.ast(m).unit};
        py::walk_stmts(
            g_.ast(m).stmt->body,
            [&](const py::Stmt& s) {
              if ((s.kind != py::StmtKind::Assign && s.kind != py::StmtKind::AnnAssign) || !s.value) return;
              for (const auto& t : s.targets) {
                const auto n = py::dotted_name(t);
                if (n == "self." + attr || n == "cls." + attr) {
                  found = true;
                  out.merge(expr(*s.value, m_scope, depth + 1, path, hopped));
                }
              }
            },
            false);
      }
      if (found) break;
    }
    if (!found) out.incomplete = true;
    path.pop_back();
    return out;
  }

  std::optional<NodeId> class_named(const std::string& name, std::size_t unit) const {
    for (const auto& n : g_.nodes()) {
      if (n.kind == NodeKind::Class && g_.meta(n.id).short_name == name && g_.ast(n.id).unit == unit &&
          g_.meta(n.id).owner == kNoNode)
        return n.id;
    }
    return std::nullopt;
  }

  // from pkg.consts import NAME -> (unit of pkg/consts.py, NAME)
  std::optional<std::pair<std::size_t, std::string>> imported_constant(const std::string& name, std::size_t unit) const {
    const auto& files = g_.project().snapshot->files;
    const auto& mod = files.at(unit).path;
    for (const auto& s : g_.project().units.at(unit).body) {
      if (s.kind != py::StmtKind::ImportFrom) continue;
      for (const auto& a : s.names) {
        if ((a.asname.empty() ? a.name : a.asname) != name) continue;
        auto target = s.name;
        if (s.level > 0) {
          auto parts = text::split(module_name_of(mod), '.');
          if (!mod.ends_with("__init__.py") && !parts.empty()) parts.pop_back();
          for (std::uint32_t i = 1; i < s.level && !parts.empty(); ++i) parts.pop_back();
          auto base = text::join(parts, ".");
          target = base.empty() ? s.name : (s.name.empty() ? base : base + "." + s.name);
        }
        for (std::size_t u = 0; u < files.size(); ++u) {
          const auto m = module_name_of(files[u].path);
          if (m == target || (m.size() > target.size() && m.ends_with("." + target))) return std::make_pair(u, a.name);
        }
      }
    }
    return std::nullopt;
  }

  const CodePropertyGraph& g_;
  std::uint32_t cap_;
};

inline LiteralSet resolve_literals(const CodePropertyGraph& g, const py::Expr& e, ResolveScope scope,
                                   std::uint32_t depth_cap = 8) {
  return LiteralResolver(g, depth_cap).resolve(e, scope);
}

// --- call context windows -------------------------------------------------

struct Guards {
  bool in_try_block = false;
  std::vector<std::string> asserts;
  std::vector<std::string> type_checks;

  bool empty() const { return !in_try_block && asserts.empty() && type_checks.empty(); }
};

struct ContextWindow {
  SourceSnippet call_site;
  NodeId function = kNoNode;
  NodeId call_node = kNoNode;
  std::string callee;
  std::vector<std::string> input_vars;
  std::vector<std::string> output_vars;
  std::vector<LineSpan> input_scope;   // statements feeding the arguments
  std::vector<LineSpan> output_scope;  // statements consuming the result
  Guards input_guards;
  Guards output_guards;
  bool result_unused = false;

  Guards guards() const {
    Guards g = input_guards;
    g.in_try_block |= output_guards.in_try_block;
    g.asserts.insert(g.asserts.end(), output_guards.asserts.begin(), output_guards.asserts.end());
    g.type_checks.insert(g.type_checks.end(), output_guards.type_checks.begin(), output_guards.type_checks.end());
    return g;
  }
};

namespace detail {

// A statement with the compound statements enclosing it inside one function.
struct Located {
  const py::Stmt* stmt;
  std::vector<const py::Stmt*> try_guarded;  // enclosing try statements whose body holds stmt and that have handlers
};

inline void flatten(const std::vector<py::Stmt>& body, std::vector<const py::Stmt*> tries, std::vector<Located>& out) {
  for (const auto& s : body) {
    out.push_back({&s, tries});
    if (s.kind == py::StmtKind::ClassDef || s.kind == py::StmtKind::FunctionDef) continue;
    auto inner = tries;
    if (s.kind == py::StmtKind::Try && !s.handlers.empty()) inner.push_back(&s);
    flatten(s.body, inner, out);
    for (const auto& h : s.handlers) flatten(h.body, tries, out);
    flatten(s.orelse, tries, out);
    flatten(s.finalbody, tries, out);
  }
}

inline std::set<std::string> reads_of(const py::Expr& e) {
  std::vector<std::string> r;
  CpgBuilder::collect_reads(e, r);
  return {r.begin(), r.end()};
}

// Reads of a statement's own expressions (targets excluded for assignments).
inline std::set<std::string> stmt_reads(const py::Stmt& s) {
  std::set<std::string> out;
  auto add = [&](const py::Expr& e) {
    auto r = reads_of(e);
    out.insert(r.begin(), r.end());
  };
  const bool assign = s.kind == py::StmtKind::Assign || s.kind == py::StmtKind::AnnAssign;
  if (s.kind == py::StmtKind::FunctionDef || s.kind == py::StmtKind::ClassDef) return out;
  for (const auto* e : py::own_exprs(s)) {
    bool is_target = false;
    if (assign || s.kind == py::StmtKind::For || s.kind == py::StmtKind::With) {
      for (const auto& t : s.targets) is_target |= &t == e;
    }
    if (!is_target) add(*e);
  }
  if (s.kind == py::StmtKind::AugAssign) {
    for (const auto& t : s.targets) add(t);
  }
  return out;
}

inline std::set<std::string> stmt_defs(const py::Stmt& s) {
  std::set<std::string> out;
  std::function<void(const py::Expr&)> collect = [&](const py::Expr& t) {
    if (t.kind == py::ExprKind::Name) out.insert(t.text);
    else if (t.kind == py::ExprKind::Attribute) {
      const auto n = py::dotted_name(t);
      if (n.starts_with("self.") || n.starts_with("cls.")) out.insert(n);
    } else if (t.kind == py::ExprKind::Tuple || t.kind == py::ExprKind::List) {
      for (const auto& c : t.children) collect(c);
    } else if (t.kind == py::ExprKind::Starred) {
      collect(t.children.front());
    }
  };
  if (s.kind == py::StmtKind::Assign || s.kind == py::StmtKind::AnnAssign || s.kind == py::StmtKind::AugAssign ||
      s.kind == py::StmtKind::For || s.kind == py::StmtKind::With) {
    for (const auto& t : s.targets) collect(t);
  }
  return out;
}

inline bool contains_type_check(const py::Expr& e, const Markers& m) {
  bool hit = false;
  py::walk_expr(e, [&](const py::Expr& x) {
    if (x.kind == py::ExprKind::Call && Markers::in(m.type_check_calls, py::dotted_name(x.children.front()))) hit = true;
  });
  return hit;
}

inline bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a) {
    if (b.contains(x)) return true;
  }
  return false;
}

// Classifies s as a guard over vars: assert, or isinstance-style check in
// an assert/if/while test.
inline void classify_guard(const py::Stmt& s, const std::set<std::string>& vars, const Markers& m,
                           const std::string& head, Guards& g) {
  if (!s.value) return;
  const bool assert_ = s.kind == py::StmtKind::Assert;
  const bool cond = s.kind == py::StmtKind::If || s.kind == py::StmtKind::While;
  if (!assert_ && !cond) return;
  if (!intersects(reads_of(*s.value), vars)) return;
  if (contains_type_check(*s.value, m)) g.type_checks.push_back(head);
  else if (assert_) g.asserts.push_back(head);
}

}  // namespace detail

inline bool callee_matches(const std::string& callee_path, const std::set<std::string>& names) {
  for (const auto& n : names) {
    if (Markers::dotted_suffix(callee_path, n)) return true;
  }
  return false;
}

// One window per call in `function` (nested definitions excluded) whose
// syntactic callee path or resolved target name matches callee_names.
inline std::vector<ContextWindow> call_context(const CodePropertyGraph& g, NodeId function,
                                               const std::set<std::string>& callee_names,
                                               const Markers& markers = Markers::defaults()) {
  if (callee_names.empty()) throw Error(ErrorCode::PreconditionViolation, "call_context: no callee names");
  std::vector<ContextWindow> out;
  if (!g.has_ast() || g.meta(function).stub) return out;
  const auto unit = g.ast(function).unit;
  const auto* def = g.ast(function).stmt;
  if (!def) return out;

  std::vector<detail::Located> stmts;
  detail::flatten(def->body, {}, stmts);

  // Call graph nodes of this function keyed by expression, plus their
  // resolved targets.
  std::map<const py::Expr*, NodeId> call_nodes;
  std::map<NodeId, std::vector<NodeId>> resolved;
  for (NodeId i = 0; i < g.nodes().size(); ++i) {
    if (g.node(i).kind == NodeKind::Call && g.meta(i).owner == function) call_nodes[g.ast(i).expr] = i;
  }
  for (std::size_t ei = 0; ei < g.edges().size(); ++ei) {
    const auto& e = g.edges()[ei];
    if (e.kind == EdgeKind::Calls && e.src == function) resolved[g.call_site(ei)].push_back(e.dst);
  }
  auto matches = [&](const py::Expr& call) {
    if (callee_matches(py::callee_path(call.children.front()), callee_names)) return true;
    auto it = call_nodes.find(&call);
    if (it == call_nodes.end()) return false;
    for (auto t : resolved[it->second]) {
      if (!g.meta(t).stub && callee_names.contains(g.meta(t).short_name)) return true;
    }
    return false;
  };

  for (std::size_t si = 0; si < stmts.size(); ++si) {
    const auto& loc = stmts[si];
    const auto& s = *loc.stmt;
    if (s.kind == py::StmtKind::FunctionDef || s.kind == py::StmtKind::ClassDef) continue;
    std::vector<const py::Expr*> calls;
    for (const auto* e : py::own_exprs(s)) {
      py::walk_expr(*e, [&](const py::Expr& x) {
        if (x.kind == py::ExprKind::Call && matches(x)) calls.push_back(&x);
      });
    }
    for (const auto* call : calls) {
      ContextWindow w;
      w.function = function;
      w.callee = py::callee_path(call->children.front());
      if (auto it = call_nodes.find(call); it != call_nodes.end()) w.call_node = it->second;
      w.call_site = snippet_of_span(g, unit, call->span, g.node(function).name);

      // input side: backward closure over arguments
      std::set<std::string> inputs;
      for (std::size_t i = 1; i < call->children.size(); ++i) {
        auto r = detail::reads_of(call->children[i]);
        inputs.insert(r.begin(), r.end());
      }
      for (std::size_t j = si; j-- > 0;) {
        const auto& prev = *stmts[j].stmt;
        if (prev.span.end > call->span.begin) continue;  // enclosing compound statement
        if (detail::intersects(detail::stmt_defs(prev), inputs)) {
          auto r = detail::stmt_reads(prev);
          inputs.insert(r.begin(), r.end());
          w.input_scope.push_back({prev.span.line_start, prev.span.line_end});
        }
      }
      std::reverse(w.input_scope.begin(), w.input_scope.end());
      w.input_vars.assign(inputs.begin(), inputs.end());
      w.input_guards.in_try_block = !loc.try_guarded.empty();
      for (std::size_t j = 0; j < si; ++j) {
        const auto& prev = *stmts[j].stmt;
        const bool encloses = prev.span.begin <= call->span.begin && call->span.end <= prev.span.end;
        if (prev.span.end > call->span.begin && !encloses) continue;
        detail::classify_guard(prev, inputs, markers, stmt_head(g, unit, prev.span), w.input_guards);
      }

      // output side
      const bool bare_expr = s.kind == py::StmtKind::ExprStmt && s.value && &*s.value == call;
      const bool direct_value = s.value && &*s.value == call &&
                                (s.kind == py::StmtKind::Assign || s.kind == py::StmtKind::AnnAssign);
      std::set<std::string> outputs;
      std::vector<const detail::Located*> consumers;
      if (bare_expr) {
        w.result_unused = true;
      } else {
        if (s.kind == py::StmtKind::Assign || s.kind == py::StmtKind::AnnAssign || s.kind == py::StmtKind::AugAssign) {
          outputs = detail::stmt_defs(s);
          outputs.erase("_");
        }
        if (!direct_value) consumers.push_back(&loc);  // the result feeds a larger expression here
        for (std::size_t j = si + 1; j < stmts.size() && !outputs.empty(); ++j) {
          const auto& next = *stmts[j].stmt;
          if (detail::intersects(detail::stmt_reads(next), outputs)) {
            consumers.push_back(&stmts[j]);
            auto d = detail::stmt_defs(next);
            outputs.insert(d.begin(), d.end());
          }
        }
        if (direct_value && consumers.empty()) w.result_unused = true;
      }
      w.output_vars.assign(outputs.begin(), outputs.end());
      for (const auto* c : consumers) {
        w.output_scope.push_back({c->stmt->span.line_start, c->stmt->span.line_end});
        if (!c->try_guarded.empty()) w.output_guards.in_try_block = true;
      }
      if (!outputs.empty()) {
        for (std::size_t j = si + 1; j < stmts.size(); ++j) {
          const auto& next = *stmts[j].stmt;
          detail::classify_guard(next, outputs, markers, stmt_head(g, unit, next.span), w.output_guards);
        }
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

// --- return analysis ----------------------------------------------------

enum class MissingReturnReason { NoReturn, BareReturnSplit };

inline std::string_view to_string(MissingReturnReason r) {
  return r == MissingReturnReason::NoReturn ? "NoReturn" : "BareReturnSplit";
}

struct MissingReturn {
  NodeId function = kNoNode;
  MissingReturnReason reason = MissingReturnReason::NoReturn;
  std::uint32_t line = 0;  // the bare return for BareReturnSplit, else the def line
};

namespace detail {

enum Outcome : unsigned { kFall = 1, kRetVal = 2, kRetBare = 4, kRaise = 8, kBreak = 16, kContinue = 32 };

inline unsigned outcomes(const std::vector<py::Stmt>& body);

inline bool is_true_constant(const std::optional<py::Expr>& e) {
  return e && ((e->kind == py::ExprKind::Constant && e->text == "True") ||
               (e->kind == py::ExprKind::Number && e->text != "0"));
}

inline unsigned stmt_outcomes(const py::Stmt& s) {
  using py::StmtKind;
  switch (s.kind) {
    case StmtKind::Return: return s.value ? kRetVal : kRetBare;
    case StmtKind::Raise: return kRaise;
    case StmtKind::Break: return kBreak;
    case StmtKind::Continue: return kContinue;
    case StmtKind::If: return outcomes(s.body) | (s.orelse.empty() ? kFall : outcomes(s.orelse));
    case StmtKind::While:
    case StmtKind::For: {
      const auto b = outcomes(s.body);
      unsigned res = b & ~(kBreak | kContinue | kFall);
      const bool infinite = s.kind == StmtKind::While && is_true_constant(s.value);
      const bool normal_exit = !infinite;
      if (normal_exit) res |= s.orelse.empty() ? kFall : outcomes(s.orelse);
      if (b & kBreak) res |= kFall;
      return res;
    }
    case StmtKind::Try: {
      auto body = outcomes(s.body);
      unsigned res = body & ~kFall;
      if (body & kFall) res |= s.orelse.empty() ? kFall : outcomes(s.orelse);
      for (const auto& h : s.handlers) res |= outcomes(h.body);
      if (!s.finalbody.empty()) {
        const auto f = outcomes(s.finalbody);
        if (!(f & kFall)) return f;
        res |= f & ~kFall;
      }
      return res;
    }
    case StmtKind::With: return outcomes(s.body);
    case StmtKind::Opaque: return s.body.empty() ? kFall : (outcomes(s.body) | kFall);
    default: return kFall;
  }
}

inline unsigned outcomes(const std::vector<py::Stmt>& body) {
  unsigned cur = kFall;
  for (const auto& s : body) {
    if (!(cur & kFall)) break;
    cur = (cur & ~kFall) | stmt_outcomes(s);
  }
  return cur;
}

inline bool is_generator(const py::Stmt& fn) {
  bool yes = false;
  py::walk_stmts(
      fn.body,
      [&](const py::Stmt& s) {
        for (const auto* e : py::own_exprs(s)) {
          py::walk_expr(*e, [&](const py::Expr& x) { yes |= x.kind == py::ExprKind::Yield; });
        }
      },
      false);
  return yes;
}

inline bool stub_body(const std::vector<py::Stmt>& body) {
  for (const auto& s : body) {
    if (py::is_docstring(s)) continue;
    if (s.kind == py::StmtKind::ExprStmt && s.value && s.value->kind == py::ExprKind::Ellipsis) continue;
    if (s.kind == py::StmtKind::Raise) continue;
    return false;
  }
  return true;
}

inline void bare_return_splits(const std::vector<py::Stmt>& body, std::vector<std::uint32_t>& lines) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto& s = body[i];
    if (s.kind == py::StmtKind::Return && !s.value && i + 1 < body.size() &&
        body[i + 1].kind == py::StmtKind::ExprStmt)
      lines.push_back(s.span.line_start);
    if (s.kind == py::StmtKind::FunctionDef || s.kind == py::StmtKind::ClassDef) continue;
    bare_return_splits(s.body, lines);
    for (const auto& h : s.handlers) bare_return_splits(h.body, lines);
    bare_return_splits(s.orelse, lines);
    bare_return_splits(s.finalbody, lines);
  }
}

}  // namespace detail

// Return analysis of a single function definition.
inline std::vector<MissingReturn> function_missing_return(const CodePropertyGraph& g, NodeId fn) {
  std::vector<MissingReturn> out;
  if (!g.has_ast() || g.node(fn).kind != NodeKind::Function || g.meta(fn).stub) return out;
  const auto& s = *g.ast(fn).stmt;
  std::vector<std::uint32_t> splits;
  detail::bare_return_splits(s.body, splits);
  for (auto line : splits) out.push_back({fn, MissingReturnReason::BareReturnSplit, line});
  if (!splits.empty()) return out;

  if (s.name == "__init__" || s.name == "__post_init__" || s.name == "__del__") return out;
  if (s.returns && s.returns->kind == py::ExprKind::Constant && s.returns->text == "None") return out;
  for (const auto& d : g.meta(fn).decorators) {
    const auto last = text::last_component(d);
    if (last == "abstractmethod" || last == "setter" || last == "deleter" || last == "overload") return out;
  }
  if (detail::is_generator(s) || detail::stub_body(s.body)) return out;
  if (!(detail::outcomes(s.body) & detail::kRetVal)) out.push_back({fn, MissingReturnReason::NoReturn, s.span.line_start});
  return out;
}

inline std::vector<MissingReturn> functions_missing_return(const CodePropertyGraph& g, NodeId class_id) {
  if (g.node(class_id).kind != NodeKind::Class) {
    throw Error(ErrorCode::PreconditionViolation, "functions_missing_return: " + g.node(class_id).name + " is not a class");
  }
  std::vector<MissingReturn> out;
  for (auto m : methods_of(g, class_id)) {
    auto r = function_missing_return(g, m);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

// --- import sets --------------------------------------------------------

struct ImportSets {
  std::set<std::string> inside;
  std::set<std::string> outside;
};

// External top-level packages per file (internal modules and stdlib removed).
inline std::map<std::string, std::set<std::string>> external_imports_by_file(
    const CodePropertyGraph& g, const std::set<std::string>& stdlib = default_stdlib()) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& n : g.nodes()) {
    if (n.kind != NodeKind::Import || g.meta(n.id).package) continue;
    const auto& m = g.meta(n.id);
    if (m.internal_import || m.top_package.empty() || m.top_package == "__future__" || stdlib.contains(m.top_package))
      continue;
    out[n.file].insert(m.top_package);
  }
  return out;
}

inline ImportSets import_sets(const CodePropertyGraph& g, const std::set<std::string>& partition,
                              const std::set<std::string>& stdlib = default_stdlib()) {
  if (g.has_ast()) {
    for (const auto& f : partition) {
      if (!g.project().snapshot->find(f)) {
        throw Error(ErrorCode::PreconditionViolation, "import_sets: " + f + " is not in the snapshot");
      }
    }
  }
  ImportSets out;
  for (const auto& [file, pkgs] : external_imports_by_file(g, stdlib)) {
    auto& dst = partition.contains(file) ? out.inside : out.outside;
    dst.insert(pkgs.begin(), pkgs.end());
  }
  return out;
}

}  // namespace agentlint
