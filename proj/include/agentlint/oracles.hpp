#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "agentlint/config.hpp"
#include "agentlint/cpg.hpp"
#include "agentlint/defects.hpp"
#include "agentlint/enrich.hpp"
#include "agentlint/markers.hpp"
#include "agentlint/reasoner.hpp"
#include "agentlint/registry.hpp"
#include "agentlint/unrt.hpp"

namespace agentlint {

struct Evidence {
  std::vector<SourceSnippet> snippets;
  nlohmann::json facts = nlohmann::json::object();

  friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct DefectFinding {
  DefectId defect = DefectId::ADAL;
  Severity severity = Severity::Defect;
  std::string file;
  LineSpan span;
  std::string subject;  // model name, tool, call path ...
  Evidence evidence;
  std::string rationale;
  std::string remediation;

  friend bool operator==(const DefectFinding&, const DefectFinding&) = default;
};

inline bool finding_less(const DefectFinding& a, const DefectFinding& b) {
  return std::tie(a.file, a.span.start, a.defect, a.span.end, a.subject) <
         std::tie(b.file, b.span.start, b.defect, b.span.end, b.subject);
}

struct OracleError {
  DefectId oracle = DefectId::ADAL;
  ErrorCode code = ErrorCode::PredicateFailure;
  std::string message;

  friend bool operator==(const OracleError&, const OracleError&) = default;
};

// A cache slot that can be filled once and never overwritten.
template <class T>
class WriteOnce {
 public:
  bool has() const { return v_.has_value(); }
  const T& get() const {
    if (!v_) throw Error(ErrorCode::PreconditionViolation, "cache slot read before it was filled");
    return *v_;
  }
  const T& set(T v) {
    if (v_) throw Error(ErrorCode::PreconditionViolation, "cache slot is write-once");
    v_ = std::move(v);
    return *v_;
  }

 private:
  std::optional<T> v_;
};

struct ToolInstance {
  NodeId node = kNoNode;
  std::string name;  // short name of the class or function
  std::string file;
  LineSpan span;
  bool function = false;

  friend bool operator==(const ToolInstance&, const ToolInstance&) = default;
};

struct ModelMention {
  std::string model;
  NodeId at = kNoNode;  // call or class carrying the literal
  SourceSnippet where;
  bool incomplete = false;
};

struct TriggerWord {
  std::string word;
  std::string origin;  // "stop" or "dispatch"
  SourceSnippet where;
};

struct TriggerWords {
  std::set<std::string> words;
  std::vector<TriggerWord> sources;
  bool incomplete = false;
};

struct OracleCaches {
  WriteOnce<std::optional<UnifiedNode>> llm_init_node;
  WriteOnce<std::optional<UnifiedNode>> agent_init_node;
  WriteOnce<std::optional<UnifiedNode>> tool_init_node;
  WriteOnce<std::vector<ToolInstance>> tool_instances;
  WriteOnce<std::optional<std::string>> llm_exec_fn;
  WriteOnce<std::optional<std::string>> tool_exec_fn;
  WriteOnce<TriggerWords> trigger_words;
  WriteOnce<std::vector<ModelMention>> model_names;
};

class OracleContext {
 public:
  OracleContext(std::shared_ptr<const ProjectSnapshot> snapshot, AnalyzerConfig config,
                std::shared_ptr<const ReasonerBackend> backend, Markers markers = Markers::defaults(),
                ModelCapabilityRegistry registry = ModelCapabilityRegistry::defaults(),
                std::set<std::string> stdlib = default_stdlib())
      : snapshot_(std::move(snapshot)),
        config_(std::move(config)),
        backend_(std::move(backend)),
        markers_(std::move(markers)),
        registry_(std::move(registry)),
        stdlib_(std::move(stdlib)),
        cpg_(build_cpg(parse_project(snapshot_))),
        unrt_(build_unrt(cpg_)) {
    if (!backend_) throw Error(ErrorCode::PreconditionViolation, "oracle context without a reasoner backend");
    if (!config_.registry_remote.empty() && !registry_.has_remote()) {
      registry_.set_remote(http_card_fetcher(config_.registry_remote, config_.backend.timeout_seconds));
    }
  }

  const ProjectSnapshot& snapshot() const { return *snapshot_; }
  const CodePropertyGraph& cpg() const { return cpg_; }
  const Unrt& unrt() const { return unrt_; }
  const AnalyzerConfig& config() const { return config_; }
  const ReasonerBackend& backend() const { return *backend_; }
  const Markers& markers() const { return markers_; }
  const ModelCapabilityRegistry& registry() const { return registry_; }
  const std::set<std::string>& stdlib() const { return stdlib_; }
  std::size_t batch() const { return std::max<std::size_t>(1, std::min<std::size_t>(config_.batch_size, backend_->batch_limit())); }

  OracleCaches caches;
  std::map<std::string, std::string> locator_notes;  // template -> reasoner note for the hit
  std::vector<std::string> notes;                    // degraded lookups etc.

 private:
  std::shared_ptr<const ProjectSnapshot> snapshot_;
  AnalyzerConfig config_;
  std::shared_ptr<const ReasonerBackend> backend_;
  Markers markers_;
  ModelCapabilityRegistry registry_;
  std::set<std::string> stdlib_;
  CodePropertyGraph cpg_;
  Unrt unrt_;
};

namespace oracle_detail {

inline bool is_real(const CodePropertyGraph& g, NodeId id) {
  return g.has_ast() && !g.meta(id).stub && !g.meta(id).package;
}

// True when `root` is on the owner chain of id (id itself included).
inline bool within(const CodePropertyGraph& g, NodeId id, NodeId root) {
  for (NodeId cur = id; cur != kNoNode; cur = g.meta(cur).owner) {
    if (cur == root) return true;
  }
  return false;
}

inline std::vector<NodeId> calls_within(const CodePropertyGraph& g, NodeId root) {
  std::vector<NodeId> out;
  for (const auto& n : g.nodes()) {
    if (n.kind == NodeKind::Call && is_real(g, n.id) && g.ast(n.id).expr && g.meta(n.id).owner != kNoNode &&
        within(g, g.meta(n.id).owner, root))
      out.push_back(n.id);
  }
  return out;
}

inline std::string call_path(const CodePropertyGraph& g, NodeId call) {
  return py::callee_path(g.ast(call).expr->children.front());
}

inline std::vector<std::string> callee_paths(const CodePropertyGraph& g, NodeId root) {
  std::vector<std::string> out;
  if (!is_real(g, root)) return out;
  for (auto c : calls_within(g, root)) out.push_back(call_path(g, c));
  return out;
}

inline std::string snippet_text(const CodePropertyGraph& g, NodeId id) {
  auto s = snippet(g, id).text;
  if (s.empty()) s = "# unresolved: " + g.node(id).name;
  return s;
}

inline bool calls_llm(const Markers& m, const std::vector<std::string>& paths) {
  for (const auto& p : paths) {
    if (m.is_completion_call(p) || m.is_client_constructor(p)) return true;
    for (const auto& part : text::split(p, '.')) {
      if (Markers::matches_any(m.llm_name_patterns, part)) return true;
    }
  }
  return false;
}

// Names bound inside a definition: parameters, assignment targets (last
// component), class-body fields.
inline std::vector<std::string> bound_names(const py::Stmt& def) {
  std::vector<std::string> out;
  for (const auto& p : def.params) out.push_back(p.name);
  py::walk_stmts(def.body, [&](const py::Stmt& s) {
    for (const auto& p : s.params) out.push_back(p.name);
    if (s.kind == py::StmtKind::FunctionDef || s.kind == py::StmtKind::ClassDef) out.push_back(s.name);
    if (s.kind == py::StmtKind::Assign || s.kind == py::StmtKind::AnnAssign || s.kind == py::StmtKind::For ||
        s.kind == py::StmtKind::With) {
      for (const auto& t : s.targets) {
        py::walk_expr(t, [&](const py::Expr& e) {
          if (e.kind == py::ExprKind::Name || e.kind == py::ExprKind::Attribute) out.push_back(e.text);
        });
      }
    }
  });
  return out;
}

inline bool holds_tool_collection(const CodePropertyGraph& g, NodeId id, const Markers& m) {
  if (!is_real(g, id) || !g.ast(id).stmt) return false;
  for (const auto& n : bound_names(*g.ast(id).stmt)) {
    const auto lower = text::to_lower(n);
    for (const auto& h : m.tool_collection_hints) {
      if (lower.find(h) != std::string::npos) return true;
    }
  }
  return false;
}

inline nlohmann::json node_facts(const OracleContext& ctx, NodeId id) {
  const auto& g = ctx.cpg();
  const auto& meta = g.meta(id);
  const auto paths = callee_paths(g, id);
  return {{"name", meta.short_name.empty() ? g.node(id).name : meta.short_name},
          {"qualname", g.node(id).name},
          {"kind", std::string(to_string(g.node(id).kind))},
          {"file", g.node(id).file},
          {"bases", meta.bases},
          {"decorators", meta.decorators},
          {"callee_paths", paths},
          {"calls_llm", calls_llm(ctx.markers(), paths)},
          {"holds_tool_collection", holds_tool_collection(g, id, ctx.markers())}};
}

inline QuestionItem node_item(const OracleContext& ctx, NodeId id) {
  return {snippet_text(ctx.cpg(), id), node_facts(ctx, id)};
}

struct ItemAnswer {
  Answer answer;
  std::string note;
};

// Splits items into batches of at most n and asks them in request order.
inline std::vector<ItemAnswer> ask_items(const OracleContext& ctx, Template t, const std::vector<QuestionItem>& items) {
  std::vector<ItemAnswer> out;
  if (items.empty()) return out;
  const auto n = ctx.batch();
  std::vector<ReasonerQuestion> qs;
  for (std::size_t i = 0; i < items.size(); i += n) {
    ReasonerQuestion q{t, {}};
    q.items.assign(items.begin() + static_cast<std::ptrdiff_t>(i),
                   items.begin() + static_cast<std::ptrdiff_t>(std::min(items.size(), i + n)));
    qs.push_back(std::move(q));
  }
  for (const auto& v : ctx.backend().ask_all(qs)) {
    for (std::size_t i = 0; i < v.answers.size(); ++i) out.push_back({v.answers[i], v.note(i)});
  }
  return out;
}

inline std::optional<UnifiedNode> search(OracleContext& ctx, Template t) {
  std::string note;
  auto pred = [&](const std::vector<const UnifiedNode*>& batch) -> std::optional<std::size_t> {
    ReasonerQuestion q{t, {}};
    for (const auto* u : batch) q.items.push_back(node_item(ctx, u->graph_id));
    const auto v = ctx.backend().ask(q);
    for (std::size_t i = 0; i < v.answers.size(); ++i) {
      if (v.answers[i].yes) {
        note = v.note(i);
        return i;
      }
    }
    return std::nullopt;
  };
  auto hit = layered_search(ctx.unrt(), pred, ctx.batch());
  if (hit) ctx.locator_notes[std::string(to_string(t))] = note;
  return hit;
}

// Functions making up a definition: a class's methods (and anything
// nested in them) or a function and its nested functions.
inline std::vector<NodeId> functions_of(const CodePropertyGraph& g, NodeId root) {
  std::vector<NodeId> out;
  if (!is_real(g, root)) return out;
  for (const auto& n : g.nodes()) {
    if (n.kind == NodeKind::Function && is_real(g, n.id) && within(g, n.id, root)) out.push_back(n.id);
  }
  return out;
}

inline DefectFinding make_finding(DefectId id, std::string file, LineSpan span, std::string subject) {
  DefectFinding f;
  f.defect = id;
  f.severity = id == DefectId::EPDD ? Severity::Warning : Severity::Defect;
  f.file = std::move(file);
  f.span = span;
  f.subject = std::move(subject);
  f.remediation = std::string(remediation(id));
  return f;
}

inline std::string join_set(const std::set<std::string>& s) {
  return text::join(std::vector<std::string>(s.begin(), s.end()), " ");
}

// String-valued registration field of a tool (name / description ...).
struct InfoField {
  std::string attr;
  std::string value;
  bool present = false;
  bool literal = true;
  std::uint32_t line = 0;
};

inline InfoField class_field(const CodePropertyGraph& g, NodeId cls, const std::vector<std::string>& attrs,
                             std::uint32_t depth) {
  std::vector<NodeId> chain{cls};
  for (auto a : ancestors_of(g, cls)) {
    if (is_real(g, a)) chain.push_back(a);
  }
  LiteralResolver resolver(g, depth);
  for (const auto& attr : attrs) {
    for (auto c : chain) {
      for (const auto& f : attribute_facts(g, c)) {
        if (f.name != attr) continue;
        InfoField out{attr, {}, true, true, f.line};
        if (f.kind == InitKind::String) {
          out.value = f.value;
        } else if (f.kind == InitKind::NonLiteral && f.expr) {
          auto r = resolver.resolve(*f.expr, ResolveScope{c, g.ast(c).unit});
          out.value = join_set(r.values);
          out.literal = !r.incomplete;
        } else if (f.kind != InitKind::Missing && f.kind != InitKind::None) {
          out.value = f.value;
        }
        return out;
      }
    }
  }
  // assigned in a method (self.name = ...)
  for (const auto& attr : attrs) {
    auto r = resolver.resolve_attr(cls, attr);
    if (!r.values.empty()) return InfoField{attr, join_set(r.values), true, !r.incomplete, g.node(cls).span.start};
  }
  return InfoField{attrs.empty() ? std::string{} : attrs.front(), {}, false, true, g.node(cls).span.start};
}

inline std::vector<std::string> implementation_identifiers(const CodePropertyGraph& g, NodeId root,
                                                           const std::set<std::string>& exclude) {
  std::set<std::string> ids;
  ids.insert(g.meta(root).short_name);
  if (g.ast(root).stmt) {
    for (const auto& n : bound_names(*g.ast(root).stmt)) {
      if (!exclude.contains(n)) ids.insert(n);
    }
  }
  for (auto c : calls_within(g, root)) ids.insert(std::string(text::last_component(call_path(g, c))));
  ids.erase("");
  return {ids.begin(), ids.end()};
}

struct ToolInfo {
  InfoField name;
  InfoField description;
  std::vector<std::string> impl_ids;
};

inline ToolInfo tool_info(const OracleContext& ctx, const ToolInstance& t) {
  const auto& g = ctx.cpg();
  const auto& m = ctx.markers();
  ToolInfo info;
  std::set<std::string> exclude(m.name_attributes.begin(), m.name_attributes.end());
  exclude.insert(m.description_attributes.begin(), m.description_attributes.end());
  if (t.function) {
    const auto& def = *g.ast(t.node).stmt;
    info.name = InfoField{"name", g.meta(t.node).short_name, true, true, def.span.line_start};
    info.description = InfoField{"description", {}, false, true, def.span.line_start};
    for (const auto& d : def.decorators) {
      if (d.kind != py::ExprKind::Call || !m.is_tool_decorator(py::dotted_name(d.children.front()))) continue;
      if (d.children.size() > 1 && d.children[1].kind == py::ExprKind::String && !d.children[1].fstring)
        info.name.value = d.children[1].value;
      if (const auto* desc = py::keyword_arg(d, "description"); desc && desc->kind == py::ExprKind::String) {
        info.description.value = desc->value;
        info.description.present = true;
      }
    }
    if (!info.description.present && !def.body.empty() && py::is_docstring(def.body.front())) {
      info.description.value = std::string(text::trim(def.body.front().value->value));
      info.description.present = true;
      info.description.line = def.body.front().span.line_start;
    }
  } else {
    info.name = class_field(g, t.node, m.name_attributes, ctx.config().literal_depth);
    info.description = class_field(g, t.node, m.description_attributes, ctx.config().literal_depth);
  }
  info.impl_ids = implementation_identifiers(g, t.node, exclude);
  return info;
}

inline std::set<std::string> exec_names(const std::optional<std::string>& fn, const std::vector<std::string>& extra) {
  std::set<std::string> out(extra.begin(), extra.end());
  if (fn && !fn->empty()) out.insert(*fn);
  return out;
}

// Method list offered to the *_EXEC_FUNCTION_NAME questions.
inline std::vector<NodeId> exec_candidates(const CodePropertyGraph& g, NodeId root) {
  if (g.node(root).kind == NodeKind::Function) return {root};
  std::vector<NodeId> out = methods_of(g, root);
  for (auto a : ancestors_of(g, root)) {
    if (!is_real(g, a)) continue;
    for (auto m : methods_of(g, a)) out.push_back(m);
  }
  return out;
}

}  // namespace oracle_detail

// --- locators -------------------------------------------------------------

inline std::optional<UnifiedNode> locate_agent_init(OracleContext& ctx) {
  if (!ctx.caches.agent_init_node.has()) {
    ctx.caches.agent_init_node.set(oracle_detail::search(ctx, Template::IS_AGENT_INIT));
  }
  return ctx.caches.agent_init_node.get();
}

// LLM initialization node; falls back to the agent's initialization, where
// the model set-up is often embedded. Model-name literals are attached.
inline std::optional<UnifiedNode> locate_llm_init(OracleContext& ctx) {
  using namespace oracle_detail;
  if (ctx.caches.llm_init_node.has()) return ctx.caches.llm_init_node.get();
  auto hit = search(ctx, Template::IS_LLM_INIT);
  if (!hit) hit = locate_agent_init(ctx);
  ctx.caches.llm_init_node.set(hit);

  std::vector<ModelMention> models;
  if (hit) {
    const auto& g = ctx.cpg();
    const auto& m = ctx.markers();
    LiteralResolver resolver(g, ctx.config().literal_depth);
    std::set<std::string> seen;
    auto add = [&](const LiteralSet& r, NodeId at, SourceSnippet where) {
      for (const auto& v : r.values) {
        if (v.empty() || !seen.insert(v).second) continue;
        models.push_back({v, at, where, r.incomplete});
      }
    };
    for (auto c : calls_within(g, hit->graph_id)) {
      const auto& call = *g.ast(c).expr;
      for (const auto& kw : m.model_keywords) {
        if (const auto* v = py::keyword_arg(call, kw)) add(resolver.resolve(*v, resolver.scope_of(c)), c, snippet(g, c));
      }
      const auto path = call_path(g, c);
      if (path.ends_with("from_pretrained") && call.children.size() > 1 &&
          call.children[1].kind != py::ExprKind::Keyword && call.children[1].kind != py::ExprKind::Starred) {
        add(resolver.resolve(call.children[1], resolver.scope_of(c)), c, snippet(g, c));
      }
    }
    if (g.node(hit->graph_id).kind == NodeKind::Class && is_real(g, hit->graph_id)) {
      for (const auto& kw : m.model_keywords) {
        auto r = resolver.resolve_attr(hit->graph_id, kw);
        if (!r.values.empty()) add(r, hit->graph_id, snippet(g, hit->graph_id));
      }
    }
  }
  ctx.caches.model_names.set(std::move(models));
  return hit;
}

inline std::optional<UnifiedNode> locate_tool_init(OracleContext& ctx) {
  if (!ctx.caches.tool_init_node.has()) {
    ctx.caches.tool_init_node.set(oracle_detail::search(ctx, Template::IS_TOOL_INIT));
  }
  return ctx.caches.tool_init_node.get();
}

// Class children of the tool initialization node (the node itself when it
// is a concrete tool), other trunk classes affirmed as tools, and
// decorator-registered functions. Sorted by graph id.
inline const std::vector<ToolInstance>& locate_tool_instances(OracleContext& ctx) {
  using namespace oracle_detail;
  if (ctx.caches.tool_instances.has()) return ctx.caches.tool_instances.get();
  const auto& g = ctx.cpg();
  const auto& t = ctx.unrt();
  const auto tool = locate_tool_init(ctx);
  std::set<NodeId> picked;
  std::set<NodeId> covered;  // bases standing for their subclasses

  auto take_class = [&](const UnifiedNode& u) {
    std::vector<NodeId> kids;
    for (const auto& c : children_of(t, u)) {
      if (c.part == Part::Trunk && c.kind == NodeKind::Class) kids.push_back(c.graph_id);
    }
    if (kids.empty()) {
      picked.insert(u.graph_id);
    } else {
      covered.insert(u.graph_id);
      picked.insert(kids.begin(), kids.end());
    }
  };
  if (tool) {
    if (tool->kind == NodeKind::Class) take_class(*tool);
    else if (is_real(g, tool->graph_id)) picked.insert(tool->graph_id);
  }
  // other tool hierarchies the first hit does not cover
  std::vector<const UnifiedNode*> rest;
  for (const auto& u : t.nodes()) {
    if (u.part == Part::Trunk && !picked.contains(u.graph_id) && !covered.contains(u.graph_id)) rest.push_back(&u);
  }
  std::vector<QuestionItem> items;
  for (const auto* u : rest) items.push_back(node_item(ctx, u->graph_id));
  const auto answers = ask_items(ctx, Template::IS_TOOL_INIT, items);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (!answers[i].answer.yes || picked.contains(rest[i]->graph_id) || covered.contains(rest[i]->graph_id)) continue;
    take_class(*rest[i]);
  }
  for (const auto& n : g.nodes()) {
    if (n.kind != NodeKind::Function || !is_real(g, n.id)) continue;
    for (const auto& d : g.meta(n.id).decorators) {
      if (ctx.markers().is_tool_decorator(d)) picked.insert(n.id);
    }
  }
  std::vector<ToolInstance> out;
  for (auto id : picked) {
    if (!is_real(g, id)) continue;
    const auto& n = g.node(id);
    out.push_back({id, g.meta(id).short_name, n.file, n.span, n.kind == NodeKind::Function});
  }
  return ctx.caches.tool_instances.set(std::move(out));
}

namespace oracle_detail {

inline std::optional<std::string> ask_exec_fn(OracleContext& ctx, Template t, NodeId root) {
  const auto& g = ctx.cpg();
  nlohmann::json facts = nlohmann::json::object();
  nlohmann::json fns = nlohmann::json::array();
  std::vector<std::string> names;
  for (auto m : exec_candidates(g, root)) {
    fns.push_back({{"name", g.meta(m).short_name}, {"callee_paths", callee_paths(g, m)}});
    names.push_back(g.meta(m).short_name);
  }
  facts["functions"] = fns;
  facts["methods"] = names;
  const auto a = ask_items(ctx, t, {QuestionItem{snippet_text(g, root), facts}});
  if (a.empty() || a.front().answer.identifier.empty()) return std::nullopt;
  return a.front().answer.identifier;
}

}  // namespace oracle_detail

inline std::optional<std::string> locate_llm_exec_fn(OracleContext& ctx) {
  if (ctx.caches.llm_exec_fn.has()) return ctx.caches.llm_exec_fn.get();
  const auto llm = locate_llm_init(ctx);
  std::optional<std::string> fn;
  if (llm && oracle_detail::is_real(ctx.cpg(), llm->graph_id))
    fn = oracle_detail::ask_exec_fn(ctx, Template::LLM_EXEC_FUNCTION_NAME, llm->graph_id);
  return ctx.caches.llm_exec_fn.set(fn);
}

inline std::optional<std::string> locate_tool_exec_fn(OracleContext& ctx) {
  if (ctx.caches.tool_exec_fn.has()) return ctx.caches.tool_exec_fn.get();
  const auto tool = locate_tool_init(ctx);
  std::optional<std::string> fn;
  if (tool && oracle_detail::is_real(ctx.cpg(), tool->graph_id))
    fn = oracle_detail::ask_exec_fn(ctx, Template::TOOL_EXEC_FUNCTION_NAME, tool->graph_id);
  return ctx.caches.tool_exec_fn.set(fn);
}

namespace oracle_detail {

// Functions of the agent's own code.
inline std::vector<NodeId> agent_functions(OracleContext& ctx) {
  const auto agent = locate_agent_init(ctx);
  if (!agent) return {};
  return functions_of(ctx.cpg(), agent->graph_id);
}

inline bool names_dispatch(const py::Expr& e, const Markers& m) {
  if (e.kind != py::ExprKind::Name && e.kind != py::ExprKind::Attribute && e.kind != py::ExprKind::Subscript)
    return false;
  const auto& base = e.kind == py::ExprKind::Subscript ? e.children.front() : e;
  const auto lower = text::to_lower(base.text);
  for (const auto& h : m.dispatch_hints) {
    if (lower.find(h) != std::string::npos) return true;
  }
  return false;
}

}  // namespace oracle_detail

// Words that steer the plan: stop lists handed to the model and literals
// compared against the selected tool/action in control conditions.
inline const TriggerWords& locate_trigger_words(OracleContext& ctx) {
  using namespace oracle_detail;
  if (ctx.caches.trigger_words.has()) return ctx.caches.trigger_words.get();
  const auto& g = ctx.cpg();
  const auto& m = ctx.markers();
  TriggerWords tw;
  const auto agent = locate_agent_init(ctx);
  if (agent && is_real(g, agent->graph_id)) {
    std::set<NodeId> fns;
    for (auto f : functions_of(g, agent->graph_id)) fns.insert(f);
    for (const auto& c : children_of(ctx.unrt(), *agent)) {
      if (c.kind == NodeKind::Function && is_real(g, c.graph_id)) fns.insert(c.graph_id);
    }
    LiteralResolver resolver(g, ctx.config().literal_depth);
    auto add = [&](const std::string& word, const char* origin, const SourceSnippet& where) {
      if (word.empty()) return;
      if (tw.words.insert(word).second) tw.sources.push_back({word, origin, where});
    };
    for (const auto& n : g.nodes()) {
      if (n.kind != NodeKind::Call || !is_real(g, n.id) || !fns.contains(g.meta(n.id).owner)) continue;
      const auto& call = *g.ast(n.id).expr;
      for (const auto& kw : m.stop_keywords) {
        const auto* v = py::keyword_arg(call, kw);
        if (!v) continue;
        auto r = resolver.resolve(*v, resolver.scope_of(n.id));
        tw.incomplete |= r.incomplete;
        const auto where = snippet(g, n.id);
        for (const auto& w : r.values) add(w, "stop", where);
      }
    }
    for (auto f : fns) {
      const auto* def = g.ast(f).stmt;
      if (!def) continue;
      const auto unit = g.ast(f).unit;
      py::walk_stmts(
          def->body,
          [&](const py::Stmt& s) {
            if ((s.kind != py::StmtKind::If && s.kind != py::StmtKind::While) || !s.value) return;
            py::walk_expr(*s.value, [&](const py::Expr& e) {
              if (e.kind != py::ExprKind::Compare) return;
              bool selector = false;
              for (const auto& op : e.children) selector |= names_dispatch(op, m);
              if (!selector) return;
              for (const auto& op : e.children) {
                if (op.kind == py::ExprKind::String && !op.fstring) {
                  add(op.value, "dispatch", snippet_of_span(g, unit, s.span, g.node(f).name));
                }
              }
            });
          },
          false);
    }
  }
  return ctx.caches.trigger_words.set(std::move(tw));
}

// --- oracles --------------------------------------------------------------

inline std::vector<DefectFinding> detect_adal(OracleContext& ctx) {
  using namespace oracle_detail;
  std::vector<DefectFinding> out;
  const auto llm = locate_llm_init(ctx);
  if (!llm) return out;
  for (const auto& mm : ctx.caches.model_names.get()) {
    CapabilityLookup cap;
    try {
      cap = ctx.registry().lookup(mm.model);
    } catch (const Error& e) {
      ctx.notes.push_back(std::string("model registry: ") + e.what() + "; using local patterns");
      cap = ctx.registry().lookup_local(mm.model);
    }
    const bool bad = cap.capability == Capability::TaskSpecific || cap.capability == Capability::OutdatedNonChat;
    const bool strict_unknown = ctx.config().strict && cap.capability == Capability::Unknown;
    if (!bad && !strict_unknown) continue;
    auto f = make_finding(DefectId::ADAL, llm->file, llm->span, mm.model);
    if (strict_unknown) f.severity = Severity::Warning;
    f.evidence.snippets.push_back(mm.where);
    f.evidence.facts = {{"model", mm.model},
                        {"capability", std::string(to_string(cap.capability))},
                        {"matched", cap.matched},
                        {"source", cap.source},
                        {"llm_init", llm->name},
                        {"resolution_incomplete", mm.incomplete}};
    if (cap.capability == Capability::TaskSpecific) {
      f.rationale = "Model '" + mm.model + "' is a task-specific model (matched '" + cap.matched +
                    "'); it is not trained to follow the agent's planning and tool-use prompts.";
    } else if (cap.capability == Capability::OutdatedNonChat) {
      f.rationale = "Model '" + mm.model + "' is a non-dialogue completion model (matched '" + cap.matched +
                    "'); it cannot hold the multi-turn conversation the agent drives.";
    } else {
      f.rationale = "Capability of model '" + mm.model + "' is unknown; reported because strict mode is on.";
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<DefectFinding> detect_ieti(OracleContext& ctx) {
  using namespace oracle_detail;
  std::vector<DefectFinding> out;
  const auto& tools = locate_tool_instances(ctx);
  const auto& g = ctx.cpg();
  std::vector<ToolInfo> infos;
  std::vector<QuestionItem> items;
  for (const auto& t : tools) {
    auto info = tool_info(ctx, t);
    const auto text = snippet_text(g, t.node);
    items.push_back({text,
                     {{"aspect", "registration"}, {"name", info.name.value}, {"description", info.description.value}}});
    items.push_back({text,
                     {{"aspect", "implementation"},
                      {"name", info.name.value},
                      {"description", info.description.value},
                      {"implementation_identifiers", info.impl_ids}}});
    infos.push_back(std::move(info));
  }
  const auto answers = ask_items(ctx, Template::TOOL_INFO_CONSISTENT, items);
  for (std::size_t i = 0; i < tools.size(); ++i) {
    const auto& reg = answers[2 * i];
    const auto& impl = answers[2 * i + 1];
    if (reg.answer.yes && impl.answer.yes) continue;
    const auto& t = tools[i];
    const auto& info = infos[i];
    auto f = make_finding(DefectId::IETI, t.file, t.span, t.name);
    f.evidence.snippets.push_back(snippet(g, t.node));
    f.evidence.facts = {{"tool", t.name},
                        {"name", info.name.value},
                        {"name_attribute", info.name.attr},
                        {"name_present", info.name.present},
                        {"description", info.description.value},
                        {"description_attribute", info.description.attr},
                        {"description_present", info.description.present},
                        {"registration_consistent", reg.answer.yes},
                        {"implementation_consistent", impl.answer.yes}};
    std::vector<std::string> why;
    if (!reg.answer.yes) why.push_back("registration: " + reg.note);
    if (!impl.answer.yes) why.push_back("implementation: " + impl.note);
    f.rationale = "Tool '" + t.name + "' has missing or inconsistent registration information (" +
                  text::join(why, "; ") + ").";
    out.push_back(std::move(f));
  }
  return out;
}

namespace oracle_detail {

// One finding per unguarded side of each matching call in the agent code.
inline std::vector<DefectFinding> guarded_calls(OracleContext& ctx, DefectId id, const std::set<std::string>& names,
                                                const std::string& what) {
  std::vector<DefectFinding> out;
  if (names.empty()) return out;
  const auto& g = ctx.cpg();
  std::vector<ContextWindow> windows;
  for (auto fn : agent_functions(ctx)) {
    auto w = call_context(g, fn, names, ctx.markers());
    windows.insert(windows.end(), w.begin(), w.end());
  }
  auto guard_facts = [](const Guards& gd, bool unused) {
    return nlohmann::json{{"in_try_block", gd.in_try_block},
                          {"asserts", gd.asserts},
                          {"type_checks", gd.type_checks},
                          {"result_unused", unused}};
  };
  std::vector<QuestionItem> in_items, out_items;
  for (const auto& w : windows) {
    in_items.push_back({w.call_site.text, guard_facts(w.input_guards, false)});
    out_items.push_back({w.call_site.text, guard_facts(w.output_guards, w.result_unused)});
  }
  const auto ins = ask_items(ctx, Template::HAS_FAULT_TOLERANCE_IN, in_items);
  const auto outs = ask_items(ctx, Template::HAS_FAULT_TOLERANCE_OUT, out_items);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (ins[i].answer.yes && outs[i].answer.yes) continue;
    const auto& w = windows[i];
    auto f = make_finding(id, w.call_site.file, w.call_site.span, w.callee);
    f.evidence.snippets.push_back(w.call_site);
    f.evidence.snippets.push_back(snippet(g, w.function));
    std::vector<std::string> sides;
    if (!ins[i].answer.yes) sides.push_back("input");
    if (!outs[i].answer.yes) sides.push_back("output");
    f.evidence.facts = {{"callee", w.callee},
                        {"function", g.node(w.function).name},
                        {"input_vars", w.input_vars},
                        {"output_vars", w.output_vars},
                        {"input_guards", guard_facts(w.input_guards, false)},
                        {"output_guards", guard_facts(w.output_guards, w.result_unused)},
                        {"unguarded", sides}};
    std::vector<std::string> why;
    if (!ins[i].answer.yes) why.push_back("input: " + ins[i].note);
    if (!outs[i].answer.yes) why.push_back("output: " + outs[i].note);
    f.rationale = what + " '" + w.callee + "' lacks fault tolerance on its " + text::join(sides, " and ") + " (" +
                  text::join(why, "; ") + ").";
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace oracle_detail

inline std::vector<DefectFinding> detect_lope(OracleContext& ctx) {
  using namespace oracle_detail;
  const auto& g = ctx.cpg();
  const auto& m = ctx.markers();
  locate_llm_init(ctx);
  const auto names = exec_names(locate_llm_exec_fn(ctx), m.completion_calls);
  auto out = guarded_calls(ctx, DefectId::LOPE, names, "Model call");

  // agent constructions that switch parse-error handling off
  for (const auto& n : g.nodes()) {
    if (n.kind != NodeKind::Call || !is_real(g, n.id) || !g.ast(n.id).expr) continue;
    const auto& call = *g.ast(n.id).expr;
    for (const auto& kw : m.parse_error_keywords) {
      const auto* v = py::keyword_arg(call, kw);
      if (!v || v->kind != py::ExprKind::Constant || v->text != "False") continue;
      auto f = make_finding(DefectId::LOPE, n.file, n.span, call_path(g, n.id));
      f.evidence.snippets.push_back(snippet(g, n.id));
      f.evidence.facts = {{"callee", call_path(g, n.id)}, {"keyword", kw}, {"value", "False"}};
      f.rationale = "'" + call_path(g, n.id) + "' is called with " + kw +
                    "=False, so unparseable model output aborts the agent instead of being handled.";
      out.push_back(std::move(f));
    }
  }
  return out;
}

inline std::vector<DefectFinding> detect_tre(OracleContext& ctx) {
  using namespace oracle_detail;
  std::vector<DefectFinding> out;
  const auto& g = ctx.cpg();
  const auto& tools = locate_tool_instances(ctx);
  for (const auto& t : tools) {
    const auto missing = t.function ? function_missing_return(g, t.node) : functions_missing_return(g, t.node);
    for (const auto& mr : missing) {
      const auto& fn = g.node(mr.function);
      auto f = make_finding(DefectId::TRE, fn.file, LineSpan{mr.line, mr.line}, g.meta(mr.function).short_name);
      f.evidence.snippets.push_back(snippet(g, mr.function));
      f.evidence.facts = {{"tool", t.name},
                          {"function", fn.name},
                          {"reason", std::string(to_string(mr.reason))},
                          {"line", mr.line}};
      f.rationale = mr.reason == MissingReturnReason::BareReturnSplit
                        ? "'" + fn.name + "' returns nothing: a bare 'return' on line " + std::to_string(mr.line) +
                              " is separated from the value meant to be returned."
                        : "'" + fn.name + "' has a path that ends without returning a value.";
      out.push_back(std::move(f));
    }
  }
  std::vector<QuestionItem> items;
  for (const auto& t : tools) items.push_back({snippet_text(g, t.node), {{"tool", t.name}}});
  const auto answers = ask_items(ctx, Template::TOOL_CODE_DEFECT, items);
  for (std::size_t i = 0; i < tools.size(); ++i) {
    if (!answers[i].answer.yes) continue;
    auto f = make_finding(DefectId::TRE, tools[i].file, tools[i].span, tools[i].name);
    f.evidence.snippets.push_back(snippet(g, tools[i].node));
    f.evidence.facts = {{"tool", tools[i].name}, {"reason", "implementation"}};
    f.rationale = answers[i].note;
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<DefectFinding> detect_als(OracleContext& ctx) {
  using namespace oracle_detail;
  std::vector<DefectFinding> out;
  const auto& tw = locate_trigger_words(ctx);
  if (tw.words.empty()) return out;
  const auto& g = ctx.cpg();
  LiteralResolver resolver(g, ctx.config().literal_depth);
  for (const auto& t : locate_tool_instances(ctx)) {
    const auto info = tool_info(ctx, t);
    std::map<std::string, std::string> tool_words;  // word -> where it comes from
    if (!info.name.value.empty()) tool_words.emplace(info.name.value, "name");
    bool incomplete = false;
    std::vector<NodeId> fns = t.function ? std::vector<NodeId>{t.node} : methods_of(g, t.node);
    for (auto fn : fns) {
      py::walk_stmts(
          g.ast(fn).stmt->body,
          [&](const py::Stmt& s) {
            if (s.kind != py::StmtKind::Return || !s.value) return;
            auto r = resolver.resolve(*s.value, ResolveScope{fn, g.ast(fn).unit});
            incomplete |= r.incomplete;
            for (const auto& v : r.values) tool_words.emplace(v, "return value of " + g.meta(fn).short_name);
          },
          false);
    }
    for (const auto& [word, source] : tool_words) {
      if (!tw.words.contains(word)) continue;
      auto f = make_finding(DefectId::ALS, t.file, t.span, t.name + ":" + word);
      f.evidence.snippets.push_back(snippet(g, t.node));
      for (const auto& s : tw.sources) {
        if (s.word == word) f.evidence.snippets.push_back(s.where);
      }
      std::string origin;
      for (const auto& s : tw.sources) {
        if (s.word == word) origin = s.origin;
      }
      f.evidence.facts = {{"tool", t.name},
                          {"word", word},
                          {"tool_side", source},
                          {"trigger_origin", origin},
                          {"trigger_words", tw.words},
                          {"tool_resolution_incomplete", incomplete}};
      f.rationale = "The " + source + " of tool '" + t.name + "' is '" + word + "', which the agent also uses as a " +
                    (origin == "stop" ? "stop word" : "control trigger") + "; the plan can end or loop unexpectedly.";
      out.push_back(std::move(f));
    }
  }
  return out;
}

inline std::vector<DefectFinding> detect_mnft(OracleContext& ctx) {
  using namespace oracle_detail;
  locate_agent_init(ctx);
  std::vector<std::string> extra;
  for (const auto& t : locate_tool_instances(ctx)) {
    if (t.function) extra.push_back(t.name);
  }
  return guarded_calls(ctx, DefectId::MNFT, exec_names(locate_tool_exec_fn(ctx), extra), "Tool call");
}

inline std::vector<DefectFinding> detect_lard(OracleContext& ctx) {
  using namespace oracle_detail;
  std::vector<DefectFinding> out;
  const auto llm = locate_llm_init(ctx);
  if (!llm || !is_real(ctx.cpg(), llm->graph_id)) return out;
  const auto exec = locate_llm_exec_fn(ctx);
  const auto& tw = locate_trigger_words(ctx);
  const auto& g = ctx.cpg();
  const auto& m = ctx.markers();
  LiteralResolver resolver(g, ctx.config().literal_depth);

  nlohmann::json creds = nlohmann::json::array();
  if (llm->kind == NodeKind::Class) {
    std::vector<NodeId> chain{llm->graph_id};
    for (auto a : ancestors_of(g, llm->graph_id)) {
      if (is_real(g, a)) chain.push_back(a);
    }
    for (auto c : chain) {
      for (const auto& f : attribute_facts(g, c)) {
        if (!m.is_credential_name(f.name)) continue;
        creds.push_back({{"name", f.name},
                         {"value", f.value},
                         {"literal", f.is_literal()},
                         {"empty", f.kind == InitKind::String && f.value.empty()},
                         {"line", f.line}});
      }
    }
  }
  std::vector<NodeId> completions;
  for (auto c : calls_within(g, llm->graph_id)) {
    const auto& call = *g.ast(c).expr;
    const auto path = call_path(g, c);
    if (m.is_completion_call(path)) completions.push_back(c);
    if (!m.is_client_constructor(path)) continue;
    for (std::size_t i = 1; i < call.children.size(); ++i) {
      const auto& a = call.children[i];
      if (a.kind != py::ExprKind::Keyword || !m.is_credential_name(a.text)) continue;
      auto r = resolver.resolve(a.children.front(), resolver.scope_of(c));
      const bool empty = !r.incomplete && r.values.size() == 1 && r.values.begin()->empty();
      creds.push_back({{"name", a.text},
                       {"value", join_set(r.values)},
                       {"literal", !r.incomplete},
                       {"empty", empty},
                       {"line", g.node(c).span.start}});
    }
  }
  std::vector<QuestionItem> items;
  std::vector<NodeId> at;
  for (auto c : completions) {
    const auto& call = *g.ast(c).expr;
    bool stop = false;
    for (const auto& kw : m.stop_keywords) stop |= py::keyword_arg(call, kw) != nullptr;
    for (std::size_t i = 1; i < call.children.size(); ++i) stop |= call.children[i].kind == py::ExprKind::Starred && call.children[i].text == "**";
    items.push_back({snippet_text(g, c),
                     {{"call", call_path(g, c)},
                      {"exec_function", exec.value_or("")},
                      {"credentials", creds},
                      {"stop_present", stop},
                      {"trigger_words_defined", !tw.words.empty()}}});
    at.push_back(c);
  }
  if (completions.empty() && !creds.empty()) {
    items.push_back({snippet_text(g, llm->graph_id),
                     {{"call", ""}, {"credentials", creds}, {"stop_present", true}, {"trigger_words_defined", false}}});
    at.push_back(llm->graph_id);
  }
  const auto answers = ask_items(ctx, Template::LLM_CALL_CORRECT, items);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (answers[i].answer.yes) continue;
    const auto& n = g.node(at[i]);
    auto f = make_finding(DefectId::LARD, n.file, n.span, items[i].facts["call"].get<std::string>());
    if (f.subject.empty()) f.subject = llm->name;
    f.evidence.snippets.push_back(snippet(g, at[i]));
    f.evidence.facts = items[i].facts;
    f.evidence.facts["trigger_words"] = tw.words;
    f.rationale = "Model API call is set up incorrectly: " + answers[i].note + ".";
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<DefectFinding> detect_epdd(OracleContext& ctx) {
  using namespace oracle_detail;
  std::vector<DefectFinding> out;
  const auto& g = ctx.cpg();
  for (const auto& t : locate_tool_instances(ctx)) {
    const auto sets = import_sets(g, {t.file}, ctx.stdlib());
    for (const auto& pkg : sets.inside) {
      if (!sets.outside.contains(pkg)) continue;
      auto f = make_finding(DefectId::EPDD, t.file, t.span, t.name + ":" + pkg);
      f.evidence.snippets.push_back(snippet(g, t.node));
      std::vector<std::string> users;
      for (const auto& [file, pkgs] : external_imports_by_file(g, ctx.stdlib())) {
        if (file != t.file && pkgs.contains(pkg)) users.push_back(file);
      }
      f.evidence.facts = {{"tool", t.name}, {"package", pkg}, {"tool_file", t.file}, {"other_files", users}};
      f.rationale = "Tool '" + t.name + "' and the agent (" + text::join(users, ", ") + ") both depend on '" + pkg +
                    "'; their version requirements may conflict.";
      out.push_back(std::move(f));
    }
  }
  return out;
}

using OracleFn = std::vector<DefectFinding> (*)(OracleContext&);

inline OracleFn oracle_for(DefectId id) {
  switch (id) {
    case DefectId::ADAL: return detect_adal;
    case DefectId::IETI: return detect_ieti;
    case DefectId::LOPE: return detect_lope;
    case DefectId::TRE: return detect_tre;
    case DefectId::ALS: return detect_als;
    case DefectId::MNFT: return detect_mnft;
    case DefectId::LARD: return detect_lard;
    case DefectId::EPDD: return detect_epdd;
  }
  return detect_adal;
}

struct RunResult {
  std::vector<DefectFinding> findings;
  std::vector<OracleError> errors;
};

// Selected oracles in the fixed order; each pulls the locators it needs.
// A failing oracle is recorded and the rest still run.
inline RunResult run_all(OracleContext& ctx, const std::set<DefectId>& enabled) {
  RunResult r;
  for (auto id : kAllDefects) {
    if (!enabled.contains(id)) continue;
    try {
      auto f = oracle_for(id)(ctx);
      r.findings.insert(r.findings.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
    } catch (const Error& e) {
      r.errors.push_back({id, e.code(), e.what()});
    } catch (const std::exception& e) {
      r.errors.push_back({id, ErrorCode::PredicateFailure, e.what()});
    }
  }
  std::stable_sort(r.findings.begin(), r.findings.end(), finding_less);
  return r;
}

inline RunResult run_all(OracleContext& ctx) { return run_all(ctx, ctx.config().enabled); }

// Which locators found something; part of the report.
inline nlohmann::json locator_summary(const OracleContext& ctx) {
  auto node = [](const WriteOnce<std::optional<UnifiedNode>>& slot) -> nlohmann::json {
    if (!slot.has()) return "not run";
    if (!slot.get()) return nullptr;
    const auto& u = *slot.get();
    return {{"name", u.name}, {"file", u.file}, {"line", u.span.start}, {"part", std::string(to_string(u.part))}};
  };
  auto ident = [](const WriteOnce<std::optional<std::string>>& slot) -> nlohmann::json {
    if (!slot.has()) return "not run";
    if (!slot.get()) return nullptr;
    return *slot.get();
  };
  nlohmann::json j = {{"llm_init", node(ctx.caches.llm_init_node)},
                      {"agent_init", node(ctx.caches.agent_init_node)},
                      {"tool_init", node(ctx.caches.tool_init_node)},
                      {"llm_exec_function", ident(ctx.caches.llm_exec_fn)},
                      {"tool_exec_function", ident(ctx.caches.tool_exec_fn)}};
  if (ctx.caches.tool_instances.has()) {
    std::vector<std::string> names;
    for (const auto& t : ctx.caches.tool_instances.get()) names.push_back(t.name);
    j["tool_instances"] = names;
  } else {
    j["tool_instances"] = "not run";
  }
  if (ctx.caches.trigger_words.has()) j["trigger_words"] = ctx.caches.trigger_words.get().words;
  else j["trigger_words"] = "not run";
  if (ctx.caches.model_names.has()) {
    std::vector<std::string> models;
    for (const auto& m : ctx.caches.model_names.get()) models.push_back(m.model);
    j["model_names"] = models;
  } else {
    j["model_names"] = "not run";
  }
  return j;
}

}  // namespace agentlint
