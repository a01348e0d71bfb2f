#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "agentlint/error.hpp"
#include "agentlint/ingest.hpp"
#include "agentlint/python/parser.hpp"

namespace agentlint {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class NodeKind { Class, Function, Call, Import, Assignment, Literal };
enum class EdgeKind { Inherits, Contains, Calls, DefUse, ImportsPackage };

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Class: return "Class";
    case NodeKind::Function: return "Function";
    case NodeKind::Call: return "Call";
    case NodeKind::Import: return "Import";
    case NodeKind::Assignment: return "Assignment";
    case NodeKind::Literal: return "Literal";
  }
  return "?";
}

inline std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Inherits: return "Inherits";
    case EdgeKind::Contains: return "Contains";
    case EdgeKind::Calls: return "Calls";
    case EdgeKind::DefUse: return "DefUse";
    case EdgeKind::ImportsPackage: return "ImportsPackage";
  }
  return "?";
}

inline NodeKind parse_node_kind(std::string_view s) {
  for (auto k : {NodeKind::Class, NodeKind::Function, NodeKind::Call, NodeKind::Import, NodeKind::Assignment,
                 NodeKind::Literal}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::IoError, "unknown node kind '" + std::string(s) + "'");
}

inline EdgeKind parse_edge_kind(std::string_view s) {
  for (auto k : {EdgeKind::Inherits, EdgeKind::Contains, EdgeKind::Calls, EdgeKind::DefUse,
                 EdgeKind::ImportsPackage}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::IoError, "unknown edge kind '" + std::string(s) + "'");
}

struct LineSpan {
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  friend bool operator==(const LineSpan&, const LineSpan&) = default;
  friend auto operator<=>(const LineSpan&, const LineSpan&) = default;
};

struct GraphNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Class;
  std::string name;
  std::string file;  // empty for unresolved stubs and package nodes
  LineSpan span;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeKind kind = EdgeKind::Contains;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct ParseFailureRecord {
  std::string file;
  std::uint32_t line = 0;
  std::string message;
  friend bool operator==(const ParseFailureRecord&, const ParseFailureRecord&) = default;
};

// Snapshot plus one AST per file (aligned with snapshot->files; files that
// failed to parse have an empty body and a failure record).
struct ParsedProject {
  std::shared_ptr<const ProjectSnapshot> snapshot;
  std::vector<py::AstUnit> units;
  std::vector<ParseFailureRecord> failures;
};

inline py::AstUnit parse_source(const SourceFile& file) {
  return py::parse_source(file.text, file.path, file.line_index);
}

inline std::shared_ptr<const ParsedProject> parse_project(std::shared_ptr<const ProjectSnapshot> snapshot) {
  auto project = std::make_shared<ParsedProject>();
  project->snapshot = snapshot;
  project->units.reserve(snapshot->files.size());
  for (const auto& f : snapshot->files) {
    try {
      project->units.push_back(parse_source(f));
    } catch (const SyntaxError& e) {
      project->failures.push_back({e.file(), e.line(), e.detail()});
      project->units.push_back(py::AstUnit{f.path, {}});
    }
  }
  return project;
}

// Where a node lives in the ASTs. stmt is set for Class/Function/Import/
// Assignment nodes; expr for Call/Literal nodes.
struct AstRef {
  std::size_t unit = std::numeric_limits<std::size_t>::max();
  const py::Stmt* stmt = nullptr;
  const py::Expr* expr = nullptr;
  py::Span span;
};

// Derived per-node facts that are not part of the exported schema.
struct NodeMeta {
  std::string short_name;
  bool stub = false;     // unresolved callee
  bool package = false;  // external package target of ImportsPackage
  NodeId enclosing_function = kNoNode;
  NodeId enclosing_class = kNoNode;  // innermost class whose body (or a method of which) holds the node
  NodeId owner = kNoNode;            // direct lexical container definition
  std::vector<std::string> decorators;
  std::vector<std::string> bases;
  std::string top_package;  // Import nodes
  bool internal_import = false;
  std::vector<std::string> defines;  // Assignment nodes
};

class CodePropertyGraph {
 public:
  CodePropertyGraph() = default;
  CodePropertyGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    index_edges();
  }

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const GraphNode& node(NodeId id) const { return nodes_.at(id); }
  const NodeMeta& meta(NodeId id) const { return meta_.at(id); }
  const AstRef& ast(NodeId id) const { return ast_index_.at(id); }
  bool has_ast() const { return project_ != nullptr; }
  const ParsedProject& project() const { return *project_; }
  std::shared_ptr<const ParsedProject> project_ptr() const { return project_; }
  const std::vector<ParseFailureRecord>& parse_failures() const {
    static const std::vector<ParseFailureRecord> none;
    return project_ ? project_->failures : none;
  }

  // Edge indices (into edges()) leaving / entering a node, in edge order.
  const std::vector<std::size_t>& out_edges(NodeId id) const { return out_.at(id); }
  const std::vector<std::size_t>& in_edges(NodeId id) const { return in_.at(id); }
  // For Calls edges: the Call node of the call site.
  NodeId call_site(std::size_t edge_index) const {
    return edge_index < call_sites_.size() ? call_sites_[edge_index] : kNoNode;
  }

  std::vector<NodeId> targets(NodeId id, EdgeKind kind) const {
    std::vector<NodeId> out;
    for (auto e : out_.at(id)) {
      if (edges_[e].kind == kind) out.push_back(edges_[e].dst);
    }
    return out;
  }
  std::vector<NodeId> sources(NodeId id, EdgeKind kind) const {
    std::vector<NodeId> out;
    for (auto e : in_.at(id)) {
      if (edges_[e].kind == kind) out.push_back(edges_[e].src);
    }
    return out;
  }

  // File index in the snapshot for a node, or npos for stubs/packages.
  std::size_t unit_of(NodeId id) const { return ast_index_.empty() ? std::string::npos : ast_index_[id].unit; }

  // Structural equality over the exported schema only.
  friend bool operator==(const CodePropertyGraph& a, const CodePropertyGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend class CpgBuilder;

  void index_edges() {
    out_.assign(nodes_.size(), {});
    in_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (e.src < nodes_.size()) out_[e.src].push_back(i);
      if (e.dst < nodes_.size()) in_[e.dst].push_back(i);
    }
    if (meta_.size() != nodes_.size()) meta_.resize(nodes_.size());
  }

  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<NodeMeta> meta_;
  std::vector<AstRef> ast_index_;
  std::vector<NodeId> call_sites_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::shared_ptr<const ParsedProject> project_;
};

// "pkg/mod.py" -> "pkg.mod"; "pkg/__init__.py" -> "pkg".
inline std::string module_name_of(std::string_view path) {
  std::string p(path);
  if (p.ends_with(".py")) p.resize(p.size() - 3);
  std::replace(p.begin(), p.end(), '/', '.');
  if (p == "__init__") return "";
  if (p.ends_with(".__init__")) p.resize(p.size() - 9);
  return p;
}

class CpgBuilder {
 public:
  explicit CpgBuilder(std::shared_ptr<const ParsedProject> project) : project_(std::move(project)) {}

  CodePropertyGraph build() {
    const auto& files = project_->snapshot->files;
    for (std::size_t u = 0; u < project_->units.size(); ++u) {
      unit_ = u;
      lines_ = &files[u].line_index;
      file_ = files[u].path;
      module_ = module_name_of(file_);
      for (const auto& part : text::split(module_, '.')) {
        if (!part.empty()) internal_names_.insert(part);
      }
      Scope module_scope{ScopeKind::Module, kNoNode, kNoNode, kNoNode, module_, {}};
      scopes_.push_back(module_scope);
      visit_body(project_->units[u].body);
      scopes_.pop_back();
    }
    resolve_imports();
    add_inherits();
    std::vector<GraphEdge> contains = std::move(contains_);
    add_calls();
    add_def_use();
    add_imports_package();

    CodePropertyGraph g;
    std::vector<GraphEdge> edges;
    std::vector<NodeId> sites;
    auto append = [&](std::vector<GraphEdge>& v, const std::vector<NodeId>* site) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        edges.push_back(v[i]);
        sites.push_back(site ? (*site)[i] : kNoNode);
      }
    };
    append(inherits_, nullptr);
    append(contains, nullptr);
    append(calls_, &call_site_of_edge_);
    append(def_use_, nullptr);
    append(imports_pkg_, nullptr);
    g.nodes_ = std::move(nodes_);
    g.edges_ = std::move(edges);
    g.meta_ = std::move(meta_);
    g.ast_index_ = std::move(ast_);
    g.call_sites_ = std::move(sites);
    g.project_ = project_;
    g.index_edges();
    return g;
  }

 private:
  enum class ScopeKind { Module, Class, Function };
  struct Scope {
    ScopeKind kind;
    NodeId def;             // Class/Function node, kNoNode for module
    NodeId function;        // innermost enclosing function (including def itself)
    NodeId klass;           // innermost enclosing class
    std::string qual;
    std::vector<std::pair<const py::Stmt*, int>> block;  // enclosing compound statements within the scope
  };

  struct SiteRecord {
    NodeId node;
    std::size_t scope_key;  // def node of the scope (or module key)
    std::vector<std::pair<const py::Stmt*, int>> block;
    std::vector<std::string> reads;
  };

  NodeId add_node(NodeKind kind, std::string name, py::Span span, const py::Stmt* stmt, const py::Expr* expr) {
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(GraphNode{id, kind, std::move(name), file_, LineSpan{span.line_start, span.line_end}});
    NodeMeta m;
    const auto& s = scopes_.back();
    m.enclosing_function = s.function;
    m.enclosing_class = s.klass;
    m.owner = s.def;
    meta_.push_back(std::move(m));
    ast_.push_back(AstRef{unit_, stmt, expr, span});
    return id;
  }

  std::size_t scope_key() const {
    const auto& s = scopes_.back();
    return s.def == kNoNode ? (std::size_t{1} << 40) + unit_ : s.def;
  }

  // --- pass 1: nodes, Contains edges, per-scope records --------------------
  void visit_body(const std::vector<py::Stmt>& body) {
    for (const auto& s : body) visit_stmt(s);
  }

  void visit_arm(const std::vector<py::Stmt>& body, const py::Stmt* owner, int arm) {
    scopes_.back().block.emplace_back(owner, arm);
    visit_body(body);
    scopes_.back().block.pop_back();
  }

  void visit_stmt(const py::Stmt& s) {
    using py::StmtKind;
    switch (s.kind) {
      case StmtKind::ClassDef: return visit_class(s);
      case StmtKind::FunctionDef: return visit_function(s);
      case StmtKind::Import:
      case StmtKind::ImportFrom: return visit_import(s);
      case StmtKind::Assign:
      case StmtKind::AnnAssign:
      case StmtKind::AugAssign: {
        std::vector<std::string> defs;
        for (const auto& t : s.targets) collect_targets(t, defs);
        const auto name = s.targets.empty() ? std::string{} : target_text(s.targets.front());
        const auto id = add_node(NodeKind::Assignment, name, s.span, &s, nullptr);
        meta_[id].defines = defs;
        meta_[id].short_name = name;
        std::vector<std::string> reads;
        if (s.value) collect_reads(*s.value, reads);
        if (s.kind == StmtKind::AugAssign) {
          for (const auto& d : defs) reads.push_back(d);
        }
        for (const auto& t : s.targets) collect_target_reads(t, reads);
        sites_.push_back(SiteRecord{id, scope_key(), scopes_.back().block, std::move(reads)});
        defs_.push_back(SiteRecord{id, scope_key(), scopes_.back().block, defs});
        visit_exprs_of(s);
        return;
      }
      default: break;
    }
    visit_exprs_of(s);
    const bool loop = s.kind == StmtKind::For || s.kind == StmtKind::While;
    visit_arm(s.body, &s, loop ? 0 : 0);
    for (std::size_t i = 0; i < s.handlers.size(); ++i) visit_arm(s.handlers[i].body, &s, 10 + static_cast<int>(i));
    visit_arm(s.orelse, &s, 1);
    visit_arm(s.finalbody, &s, 2);
  }

  void visit_exprs_of(const py::Stmt& s) {
    auto exprs = py::own_exprs(s);
    std::stable_sort(exprs.begin(), exprs.end(),
                     [](const py::Expr* a, const py::Expr* b) { return a->span.begin < b->span.begin; });
    for (const auto* e : exprs) visit_expr(*e, &s);
  }

  void visit_expr(const py::Expr& e, const py::Stmt* stmt) {
    using py::ExprKind;
    if (e.kind == ExprKind::Call) {
      const auto id = add_node(NodeKind::Call, py::callee_path(e.children.front()), e.span, stmt, &e);
      meta_[id].short_name = std::string(py::callee_short_name(e));
      std::vector<std::string> reads;
      collect_reads(e, reads);
      sites_.push_back(SiteRecord{id, scope_key(), scopes_.back().block, std::move(reads)});
      call_nodes_.push_back(id);
    } else if (e.kind == ExprKind::String) {
      add_node(NodeKind::Literal, e.value, e.span, stmt, &e);
    } else if (e.kind == ExprKind::Number) {
      add_node(NodeKind::Literal, e.text, e.span, stmt, &e);
    }
    for (const auto& c : e.children) visit_expr(c, stmt);
  }

  void visit_class(const py::Stmt& s) {
    for (const auto& d : s.decorators) visit_expr(d, &s);
    const auto& outer = scopes_.back();
    const auto qual = outer.qual.empty() ? s.name : outer.qual + "." + s.name;
    const auto id = add_node(NodeKind::Class, qual, s.span, &s, nullptr);
    auto& m = meta_[id];
    m.short_name = s.name;
    for (const auto& d : s.decorators) m.decorators.push_back(decorator_name(d));
    for (const auto& b : s.bases) {
      if (b.kind == py::ExprKind::Keyword || b.kind == py::ExprKind::Starred) continue;
      auto n = py::dotted_name(b.kind == py::ExprKind::Subscript ? b.children.front() : b);
      if (!n.empty()) m.bases.push_back(n);
    }
    classes_.push_back(id);
    if (outer.kind == ScopeKind::Module) top_classes_[unit_][s.name] = id;
    class_by_qual_[qual] = id;
    classes_by_name_[s.name].push_back(id);
    for (const auto& b : s.bases) visit_expr(b, &s);
    scopes_.push_back(Scope{ScopeKind::Class, id, outer.function, id, qual, {}});
    visit_body(s.body);
    scopes_.pop_back();
  }

  void visit_function(const py::Stmt& s) {
    for (const auto& d : s.decorators) visit_expr(d, &s);
    const auto& outer = scopes_.back();
    const auto qual = outer.qual.empty() ? s.name : outer.qual + "." + s.name;
    const auto id = add_node(NodeKind::Function, qual, s.span, &s, nullptr);
    auto& m = meta_[id];
    m.short_name = s.name;
    for (const auto& d : s.decorators) m.decorators.push_back(decorator_name(d));
    if (outer.kind == ScopeKind::Class) {
      contains_.push_back(GraphEdge{outer.def, id, EdgeKind::Contains});
      methods_[outer.def][s.name] = id;
    } else if (outer.kind == ScopeKind::Function) {
      contains_.push_back(GraphEdge{outer.def, id, EdgeKind::Contains});
      nested_defs_[outer.def][s.name] = id;
    } else {
      top_functions_[unit_][s.name] = id;
      functions_by_name_[s.name].push_back(id);
    }
    functions_.push_back(id);
    for (const auto& p : s.params) {
      if (p.annotation) visit_expr(*p.annotation, &s);
      if (p.default_value) visit_expr(*p.default_value, &s);
    }
    if (s.returns) visit_expr(*s.returns, &s);
    scopes_.push_back(Scope{ScopeKind::Function, id, id, outer.klass, qual, {}});
    // parameters count as definitions at function entry
    std::vector<std::string> params;
    for (const auto& p : s.params) {
      if (!p.name.empty()) params.push_back(p.name);
    }
    param_names_[id] = params;
    visit_body(s.body);
    scopes_.pop_back();
  }

  void visit_import(const py::Stmt& s) {
    for (const auto& a : s.names) {
      std::string full;
      std::string top;
      if (s.kind == py::StmtKind::Import) {
        full = a.name;
        top = std::string(text::first_component(a.name));
        const auto local = a.asname.empty() ? top : a.asname;
        aliases_[unit_][local] = a.asname.empty() ? top : a.name;
      } else {
        full = std::string(s.level, '.') + s.name + (s.name.empty() || a.name == "*" ? "" : ".") +
               (a.name == "*" ? "*" : a.name);
        if (!s.name.empty() || s.level == 0) top = std::string(text::first_component(s.name));
        if (a.name != "*") {
          const auto local = a.asname.empty() ? a.name : a.asname;
          aliases_[unit_][local] = resolve_relative(s) + (resolve_relative(s).empty() ? "" : ".") + a.name;
        }
      }
      const auto id = add_node(NodeKind::Import, full, s.span, &s, nullptr);
      meta_[id].short_name = a.asname.empty() ? a.name : a.asname;
      meta_[id].top_package = s.level > 0 ? std::string{} : top;
      import_nodes_.push_back(id);
    }
  }

  // Absolute module path targeted by a from-import.
  std::string resolve_relative(const py::Stmt& s) const {
    if (s.level == 0) return s.name;
    auto parts = text::split(module_, '.');
    // a module's package is its module path minus the last part (unless __init__)
    const bool is_pkg_init = file_.ends_with("__init__.py");
    if (!is_pkg_init && !parts.empty()) parts.pop_back();
    for (std::uint32_t i = 1; i < s.level && !parts.empty(); ++i) parts.pop_back();
    auto base = text::join(parts, ".");
    if (!s.name.empty()) base = base.empty() ? s.name : base + "." + s.name;
    return base;
  }

  static std::string decorator_name(const py::Expr& d) {
    if (d.kind == py::ExprKind::Call) return py::dotted_name(d.children.front());
    return py::dotted_name(d);
  }

  static std::string target_text(const py::Expr& t) {
    if (t.kind == py::ExprKind::Tuple || t.kind == py::ExprKind::List) {
      std::vector<std::string> parts;
      for (const auto& c : t.children) parts.push_back(target_text(c));
      return text::join(parts, ",");
    }
    if (t.kind == py::ExprKind::Starred) return target_text(t.children.front());
    if (t.kind == py::ExprKind::Subscript || t.kind == py::ExprKind::Call) return py::callee_path(t);
    auto n = py::dotted_name(t);
    return n.empty() ? py::callee_path(t) : n;
  }

  // Variable keys defined by a target: plain names and self./cls. attributes.
  static void collect_targets(const py::Expr& t, std::vector<std::string>& out) {
    using py::ExprKind;
    switch (t.kind) {
      case ExprKind::Name: out.push_back(t.text); break;
      case ExprKind::Attribute: {
        auto n = py::dotted_name(t);
        if (n.starts_with("self.") || n.starts_with("cls.")) out.push_back(n);
        break;
      }
      case ExprKind::Tuple:
      case ExprKind::List:
        for (const auto& c : t.children) collect_targets(c, out);
        break;
      case ExprKind::Starred: collect_targets(t.children.front(), out); break;
      default: break;
    }
  }

  // Names read by subscript/attribute targets (x[i] = v reads x and i).
  static void collect_target_reads(const py::Expr& t, std::vector<std::string>& out) {
    using py::ExprKind;
    if (t.kind == ExprKind::Subscript) {
      collect_reads(t.children[0], out);
      collect_reads(t.children[1], out);
    } else if (t.kind == ExprKind::Tuple || t.kind == ExprKind::List) {
      for (const auto& c : t.children) collect_target_reads(c, out);
    }
  }

 public:
  // Variable keys read by an expression: names, plus "self.x" for
  // attribute chains rooted at self/cls.
  static void collect_reads(const py::Expr& e, std::vector<std::string>& out) {
    using py::ExprKind;
    if (e.kind == ExprKind::Name) {
      out.push_back(e.text);
      return;
    }
    if (e.kind == ExprKind::Attribute) {
      const auto n = py::dotted_name(e);
      if (n.starts_with("self.") || n.starts_with("cls.")) {
        // self.a.b reads self.a
        const auto second_dot = n.find('.', n.find('.') + 1);
        out.push_back(second_dot == std::string::npos ? n : n.substr(0, second_dot));
      }
    }
    if (e.kind == ExprKind::Lambda) return;
    for (const auto& c : e.children) collect_reads(c, out);
  }

 private:
  // --- pass 2: resolution --------------------------------------------------
  void resolve_imports() {
    for (const auto& f : project_->snapshot->files) {
      std::filesystem::path p(f.path);
      for (const auto& part : p.parent_path()) internal_names_.insert(part.string());
      internal_names_.insert(p.stem().string());
    }
    for (auto id : import_nodes_) {
      auto& m = meta_[id];
      m.internal_import = m.top_package.empty() || internal_names_.contains(m.top_package);
    }
  }

  std::optional<NodeId> find_class_by_qual_suffix(const std::string& target) const {
    if (auto it = class_by_qual_.find(target); it != class_by_qual_.end()) return it->second;
    std::optional<NodeId> hit;
    for (const auto& [qual, id] : class_by_qual_) {
      if (qual.size() > target.size() && qual.ends_with(target) && qual[qual.size() - target.size() - 1] == '.') {
        if (hit) return std::nullopt;
        hit = id;
      }
    }
    return hit;
  }

  std::optional<NodeId> find_function_by_qual_suffix(const std::string& target) const {
    std::optional<NodeId> hit;
    for (auto id : functions_) {
      const auto& qual = nodes_[id].name;
      if (qual == target) return id;
      if (qual.size() > target.size() && qual.ends_with(target) && qual[qual.size() - target.size() - 1] == '.' &&
          meta_[id].owner == kNoNode) {
        if (hit) return std::nullopt;
        hit = id;
      }
    }
    return hit;
  }

  std::optional<NodeId> resolve_class_ref(const std::string& dotted, std::size_t unit) const {
    if (dotted.empty()) return std::nullopt;
    const auto head = std::string(text::first_component(dotted));
    if (dotted.find('.') == std::string::npos) {
      if (auto it = top_classes_.find(unit); it != top_classes_.end()) {
        if (auto c = it->second.find(dotted); c != it->second.end()) return c->second;
      }
    }
    if (auto it = aliases_.find(unit); it != aliases_.end()) {
      if (auto a = it->second.find(head); a != it->second.end()) {
        const auto rest = dotted.size() > head.size() ? dotted.substr(head.size()) : std::string{};
        if (auto c = find_class_by_qual_suffix(a->second + rest)) return c;
      }
    }
    if (auto c = class_by_qual_.find(dotted); c != class_by_qual_.end()) return c->second;
    if (dotted.find('.') == std::string::npos) {
      if (auto it = classes_by_name_.find(dotted); it != classes_by_name_.end() && it->second.size() == 1) {
        return it->second.front();
      }
    }
    return std::nullopt;
  }

  void add_inherits() {
    for (auto c : classes_) {
      std::set<NodeId> seen;
      for (const auto& base : meta_[c].bases) {
        auto target = resolve_class_ref(base, ast_[c].unit);
        if (target && *target != c && seen.insert(*target).second) {
          inherits_.push_back(GraphEdge{c, *target, EdgeKind::Inherits});
        }
      }
    }
  }

  std::vector<NodeId> class_bases(NodeId c) const {
    std::vector<NodeId> out;
    for (const auto& e : inherits_) {
      if (e.src == c) out.push_back(e.dst);
    }
    return out;
  }

  std::optional<NodeId> method_in_hierarchy(NodeId klass, const std::string& name) const {
    std::vector<NodeId> queue{klass};
    std::set<NodeId> seen{klass};
    for (std::size_t i = 0; i < queue.size(); ++i) {
      if (auto it = methods_.find(queue[i]); it != methods_.end()) {
        if (auto m = it->second.find(name); m != it->second.end()) return m->second;
      }
      for (auto b : class_bases(queue[i])) {
        if (seen.insert(b).second) queue.push_back(b);
      }
    }
    return std::nullopt;
  }

  std::optional<NodeId> constructor_of(NodeId klass) const { return method_in_hierarchy(klass, "__init__"); }

  std::optional<NodeId> resolve_bare_call(const std::string& name, NodeId caller, std::size_t unit) const {
    // 1. lexical function scopes, innermost first
    for (NodeId f = caller; f != kNoNode; f = meta_[f].enclosing_function == f ? meta_[f].owner : meta_[f].owner) {
      if (nodes_[f].kind != NodeKind::Function) break;
      if (auto it = nested_defs_.find(f); it != nested_defs_.end()) {
        if (auto d = it->second.find(name); d != it->second.end()) return d->second;
      }
    }
    // 2. same file
    if (auto it = top_functions_.find(unit); it != top_functions_.end()) {
      if (auto d = it->second.find(name); d != it->second.end()) return d->second;
    }
    if (auto it = top_classes_.find(unit); it != top_classes_.end()) {
      if (auto c = it->second.find(name); c != it->second.end()) return constructor_of(c->second);
    }
    // 3. imported names
    if (auto it = aliases_.find(unit); it != aliases_.end()) {
      if (auto a = it->second.find(name); a != it->second.end()) {
        if (auto f = find_function_by_qual_suffix(a->second)) return f;
        if (auto c = find_class_by_qual_suffix(a->second)) return constructor_of(*c);
      }
    }
    // 4. project-global unique module-level function
    if (auto it = functions_by_name_.find(name); it != functions_by_name_.end() && it->second.size() == 1) {
      return it->second.front();
    }
    return std::nullopt;
  }

  std::optional<NodeId> resolve_call(const py::Expr& call, NodeId caller, std::size_t unit) const {
    const auto& callee = call.children.front();
    if (callee.kind == py::ExprKind::Name) return resolve_bare_call(callee.text, caller, unit);
    if (callee.kind != py::ExprKind::Attribute) return std::nullopt;
    const auto& recv = callee.children.front();
    const auto& fn_stmt = *ast_[caller].stmt;
    std::string self_name;
    if (meta_[caller].owner != kNoNode && nodes_[meta_[caller].owner].kind == NodeKind::Class &&
        !fn_stmt.params.empty()) {
      self_name = fn_stmt.params.front().name;
    }
    // 2. same class (and its project bases) through self/cls
    if (recv.kind == py::ExprKind::Name && !self_name.empty() && recv.text == self_name) {
      return method_in_hierarchy(meta_[caller].owner, callee.text);
    }
    const auto recv_name = py::dotted_name(recv);
    if (recv_name.empty()) return std::nullopt;
    // module.func via an imported project module
    if (auto it = aliases_.find(unit); it != aliases_.end()) {
      const auto head = std::string(text::first_component(recv_name));
      if (auto a = it->second.find(head); a != it->second.end()) {
        const auto rest = recv_name.size() > head.size() ? recv_name.substr(head.size()) : std::string{};
        const auto target = a->second + rest + "." + callee.text;
        for (auto f : functions_) {
          if (nodes_[f].name == target && meta_[f].owner == kNoNode) return f;
        }
      }
    }
    // Class.method on a project class
    if (auto c = resolve_class_ref(recv_name, unit)) return method_in_hierarchy(*c, callee.text);
    return std::nullopt;
  }

  NodeId stub_for(const std::string& name) {
    if (auto it = stubs_.find(name); it != stubs_.end()) return it->second;
    pending_stubs_.insert(name);
    return kNoNode;
  }

  void add_calls() {
    // first pass: find which stubs are needed so their ids are sorted by name
    struct Pending {
      NodeId caller;
      NodeId site;
      std::optional<NodeId> target;
      std::string stub;
    };
    std::vector<Pending> pending;
    for (auto site : call_nodes_) {
      const auto caller = meta_[site].enclosing_function;
      if (caller == kNoNode) continue;
      const auto& ref = ast_[site];
      auto target = resolve_call(*ref.expr, caller, ref.unit);
      Pending p{caller, site, target, {}};
      if (!target) {
        p.stub = nodes_[site].name;
        pending_stubs_.insert(p.stub);
      }
      pending.push_back(std::move(p));
    }
    file_.clear();
    for (const auto& name : pending_stubs_) {
      py::Span none{};
      scopes_.push_back(Scope{ScopeKind::Module, kNoNode, kNoNode, kNoNode, "", {}});
      unit_ = std::numeric_limits<std::size_t>::max();
      const auto id = add_node(NodeKind::Function, name, none, nullptr, nullptr);
      scopes_.pop_back();
      meta_[id].stub = true;
      meta_[id].short_name = std::string(text::last_component(name));
      stubs_[name] = id;
    }
    for (const auto& p : pending) {
      const auto dst = p.target ? *p.target : stubs_.at(p.stub);
      calls_.push_back(GraphEdge{p.caller, dst, EdgeKind::Calls});
      call_site_of_edge_.push_back(p.site);
    }
  }

  static bool block_encloses(const std::vector<std::pair<const py::Stmt*, int>>& outer,
                             const std::vector<std::pair<const py::Stmt*, int>>& inner) {
    if (outer.size() > inner.size()) return false;
    return std::equal(outer.begin(), outer.end(), inner.begin());
  }

  void add_def_use() {
    // group definitions by scope key
    std::map<std::size_t, std::vector<const SiteRecord*>> defs_by_scope;
    for (const auto& d : defs_) defs_by_scope[d.scope_key].push_back(&d);

    for (const auto& use : sites_) {
      auto it = defs_by_scope.find(use.scope_key);
      std::set<std::string> reads(use.reads.begin(), use.reads.end());
      std::set<NodeId> linked;
      if (it != defs_by_scope.end()) {
        const auto& defs = it->second;
        for (const auto& var : reads) {
          // candidates in document order before the use
          std::vector<const SiteRecord*> cands;
          for (const auto* d : defs) {
            if (d->node >= use.node) break;
            if (std::find(d->reads.begin(), d->reads.end(), var) != d->reads.end()) cands.push_back(d);
          }
          for (std::size_t i = 0; i < cands.size(); ++i) {
            bool killed = false;
            for (std::size_t j = i + 1; j < cands.size() && !killed; ++j) {
              killed = block_encloses(cands[j]->block, use.block);
            }
            if (!killed && cands[i]->node != use.node && linked.insert(cands[i]->node).second) {
              def_use_.push_back(GraphEdge{cands[i]->node, use.node, EdgeKind::DefUse});
            }
          }
        }
      }
      // class-attribute constant bindings reached through self./cls.
      const auto klass = meta_[use.node].enclosing_class;
      if (klass == kNoNode || meta_[use.node].enclosing_function == kNoNode) continue;
      auto cit = defs_by_scope.find(klass);
      if (cit == defs_by_scope.end()) continue;
      for (const auto& var : reads) {
        if (!var.starts_with("self.") && !var.starts_with("cls.")) continue;
        const auto attr = var.substr(var.find('.') + 1);
        for (const auto* d : cit->second) {
          if (std::find(d->reads.begin(), d->reads.end(), attr) != d->reads.end() &&
              linked.insert(d->node).second) {
            def_use_.push_back(GraphEdge{d->node, use.node, EdgeKind::DefUse});
          }
        }
      }
    }
    std::stable_sort(def_use_.begin(), def_use_.end(), [](const GraphEdge& a, const GraphEdge& b) {
      return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
  }

  void add_imports_package() {
    std::set<std::string> packages;
    for (auto id : import_nodes_) {
      if (!meta_[id].internal_import) packages.insert(meta_[id].top_package);
    }
    std::map<std::string, NodeId> pkg_node;
    file_.clear();
    unit_ = std::numeric_limits<std::size_t>::max();
    scopes_.push_back(Scope{ScopeKind::Module, kNoNode, kNoNode, kNoNode, "", {}});
    for (const auto& p : packages) {
      const auto id = add_node(NodeKind::Import, p, py::Span{}, nullptr, nullptr);
      meta_[id].package = true;
      meta_[id].short_name = p;
      meta_[id].top_package = p;
      pkg_node[p] = id;
    }
    scopes_.pop_back();
    for (auto id : import_nodes_) {
      if (!meta_[id].internal_import) {
        imports_pkg_.push_back(GraphEdge{id, pkg_node.at(meta_[id].top_package), EdgeKind::ImportsPackage});
      }
    }
  }

  std::shared_ptr<const ParsedProject> project_;
  std::size_t unit_ = 0;
  const text::LineIndex* lines_ = nullptr;
  std::string file_;
  std::string module_;
  std::vector<Scope> scopes_;

  std::vector<GraphNode> nodes_;
  std::vector<NodeMeta> meta_;
  std::vector<AstRef> ast_;

  std::vector<GraphEdge> inherits_, contains_, calls_, def_use_, imports_pkg_;
  std::vector<NodeId> call_site_of_edge_;

  std::vector<NodeId> classes_, functions_, call_nodes_, import_nodes_;
  std::vector<SiteRecord> sites_, defs_;
  std::map<std::size_t, std::map<std::string, NodeId>> top_classes_, top_functions_;
  std::map<std::size_t, std::map<std::string, std::string>> aliases_;
  std::map<NodeId, std::map<std::string, NodeId>> methods_, nested_defs_;
  std::map<NodeId, std::vector<std::string>> param_names_;
  std::map<std::string, NodeId> class_by_qual_;
  std::map<std::string, std::vector<NodeId>> classes_by_name_, functions_by_name_;
  std::set<std::string> internal_names_;
  std::set<std::string> pending_stubs_;
  std::map<std::string, NodeId> stubs_;
};

inline CodePropertyGraph build_cpg(std::shared_ptr<const ParsedProject> project) {
  return CpgBuilder(std::move(project)).build();
}

inline CodePropertyGraph build_cpg(const ProjectSnapshot& snapshot) {
  if (snapshot.files.empty()) throw Error(ErrorCode::PreconditionViolation, "build_cpg: empty snapshot");
  return build_cpg(parse_project(std::make_shared<const ProjectSnapshot>(snapshot)));
}

// Returns human-readable violations of the edge well-formedness rules;
// empty when the graph is valid.
inline std::vector<std::string> validate_cpg(const CodePropertyGraph& g) {
  std::vector<std::string> bad;
  const auto& nodes = g.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != i) bad.push_back("node ids not dense at index " + std::to_string(i));
  }
  auto kind = [&](NodeId id) { return nodes[id].kind; };
  for (const auto& e : g.edges()) {
    if (e.src >= nodes.size() || e.dst >= nodes.size()) {
      bad.push_back("dangling edge " + std::to_string(e.src) + "->" + std::to_string(e.dst));
      continue;
    }
    bool ok = true;
    switch (e.kind) {
      case EdgeKind::Inherits: ok = kind(e.src) == NodeKind::Class && kind(e.dst) == NodeKind::Class; break;
      case EdgeKind::Contains:
        ok = (kind(e.src) == NodeKind::Class || kind(e.src) == NodeKind::Function) && kind(e.dst) == NodeKind::Function;
        break;
      case EdgeKind::Calls: ok = kind(e.src) == NodeKind::Function && kind(e.dst) == NodeKind::Function; break;
      case EdgeKind::DefUse:
        ok = kind(e.src) == NodeKind::Assignment &&
             (kind(e.dst) == NodeKind::Assignment || kind(e.dst) == NodeKind::Call) && e.src < e.dst;
        break;
      case EdgeKind::ImportsPackage: ok = kind(e.src) == NodeKind::Import && kind(e.dst) == NodeKind::Import; break;
    }
    if (!ok) {
      bad.push_back(std::string(to_string(e.kind)) + " edge " + std::to_string(e.src) + "->" +
                    std::to_string(e.dst) + " violates endpoint kinds");
    }
  }
  return bad;
}

// --- node/edge file export --------------------------------------------------

inline nlohmann::json node_to_json(const GraphNode& n) {
  return {{"id", n.id},
          {"kind", to_string(n.kind)},
          {"name", n.name},
          {"file", n.file},
          {"span", nlohmann::json::array({n.span.start, n.span.end})}};
}

inline nlohmann::json edge_to_json(const GraphEdge& e) {
  return {{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}};
}

struct GraphFiles {
  std::filesystem::path nodes;
  std::filesystem::path edges;
};

inline GraphFiles export_graph(const CodePropertyGraph& g, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  GraphFiles out{dir / "nodes.jsonl", dir / "edges.jsonl"};
  std::ofstream nodes(out.nodes, std::ios::binary | std::ios::trunc);
  std::ofstream edges(out.edges, std::ios::binary | std::ios::trunc);
  if (!nodes || !edges) throw Error(ErrorCode::IoError, "cannot write graph files under " + dir.string());
  const auto handler = nlohmann::json::error_handler_t::replace;
  for (const auto& n : g.nodes()) nodes << node_to_json(n).dump(-1, ' ', false, handler) << '\n';
  for (const auto& e : g.edges()) edges << edge_to_json(e).dump(-1, ' ', false, handler) << '\n';
  if (!nodes.flush() || !edges.flush()) throw Error(ErrorCode::IoError, "failed writing graph files");
  return out;
}

inline CodePropertyGraph import_graph(const std::filesystem::path& dir) {
  auto read_lines = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::vector<nlohmann::json> out;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        out.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, p.string() + ": " + e.what());
      }
    }
    return out;
  };
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  try {
    for (const auto& j : read_lines(dir / "nodes.jsonl")) {
      GraphNode n;
      n.id = j.at("id").get<NodeId>();
      n.kind = parse_node_kind(j.at("kind").get<std::string>());
      n.name = j.at("name").get<std::string>();
      n.file = j.at("file").get<std::string>();
      n.span = LineSpan{j.at("span").at(0).get<std::uint32_t>(), j.at("span").at(1).get<std::uint32_t>()};
      nodes.push_back(std::move(n));
    }
    for (const auto& j : read_lines(dir / "edges.jsonl")) {
      edges.push_back(GraphEdge{j.at("src").get<NodeId>(), j.at("dst").get<NodeId>(),
                                parse_edge_kind(j.at("kind").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed graph file: ") + e.what());
  }
  return CodePropertyGraph(std::move(nodes), std::move(edges));
}

}  // namespace agentlint
