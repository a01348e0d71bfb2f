#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agentlint/cpg.hpp"

namespace agentlint {

enum class Part { Trunk, Branch, Leaf };

inline std::string_view to_string(Part p) {
  switch (p) {
    case Part::Trunk: return "Trunk";
    case Part::Branch: return "Branch";
    case Part::Leaf: return "Leaf";
  }
  return "?";
}

enum class LeafRole { None, Callee, Caller };

struct UnifiedNode {
  NodeId graph_id = kNoNode;
  NodeKind kind = NodeKind::Class;
  std::string name;
  std::string file;
  LineSpan span;
  Part part = Part::Trunk;
  std::uint32_t layer = 0;
  std::uint32_t occurrence = 0;  // n-th occurrence of graph_id in search order

  // tree bookkeeping
  std::uint64_t tree = 0;
  std::size_t index = 0;  // position in search order
  std::size_t parent = std::numeric_limits<std::size_t>::max();
  LeafRole role = LeafRole::None;
  bool cycle = false;  // trunk class caught in an inheritance cycle
};

struct InheritanceCycle {
  std::string file;
  std::vector<std::string> classes;
};

class Unrt {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // All occurrences in search order: parts Trunk, Branch, Leaf; within a
  // part by layer; within a layer by document order.
  const std::vector<UnifiedNode>& nodes() const { return nodes_; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
  const std::vector<InheritanceCycle>& cycles() const { return cycles_; }
  std::uint64_t id() const { return id_; }
  bool empty() const { return nodes_.empty(); }

  bool owns(const UnifiedNode& n) const {
    return n.tree == id_ && n.index < nodes_.size() && nodes_[n.index].graph_id == n.graph_id;
  }

  // [begin, end) ranges of each (part, layer) group in search order.
  struct Group {
    Part part;
    std::uint32_t layer;
    std::size_t begin;
    std::size_t end;
  };
  const std::vector<Group>& groups() const { return groups_; }

 private:
  friend Unrt build_unrt(const CodePropertyGraph&);
  std::vector<UnifiedNode> nodes_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<Group> groups_;
  std::vector<InheritanceCycle> cycles_;
  std::uint64_t id_ = 0;
};

namespace detail {
inline std::uint64_t next_tree_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}
}  // namespace detail

inline Unrt build_unrt(const CodePropertyGraph& g) {
  Unrt t;
  t.id_ = detail::next_tree_id();
  const auto& nodes = g.nodes();

  // Step 1: trunk. Primary parent = first Inherits target.
  std::vector<NodeId> classes;
  for (const auto& n : nodes) {
    if (n.kind == NodeKind::Class) classes.push_back(n.id);
  }
  std::map<NodeId, NodeId> primary;
  for (auto c : classes) {
    auto bases = g.targets(c, EdgeKind::Inherits);
    if (!bases.empty()) primary[c] = bases.front();
  }
  // cycle detection along primary-parent chains
  std::set<NodeId> in_cycle;
  for (auto c : classes) {
    std::vector<NodeId> path;
    std::set<NodeId> on_path;
    NodeId cur = c;
    while (true) {
      if (in_cycle.contains(cur)) break;
      if (on_path.contains(cur)) {
        auto it = std::find(path.begin(), path.end(), cur);
        std::vector<NodeId> members(it, path.end());
        std::sort(members.begin(), members.end());
        InheritanceCycle cyc;
        cyc.file = nodes[members.front()].file;
        for (auto m : members) {
          in_cycle.insert(m);
          cyc.classes.push_back(nodes[m].name);
        }
        t.cycles_.push_back(std::move(cyc));
        break;
      }
      on_path.insert(cur);
      path.push_back(cur);
      auto p = primary.find(cur);
      if (p == primary.end()) break;
      cur = p->second;
    }
  }
  std::map<NodeId, std::uint32_t> depth;
  std::function<std::uint32_t(NodeId)> depth_of = [&](NodeId c) -> std::uint32_t {
    if (auto it = depth.find(c); it != depth.end()) return it->second;
    std::uint32_t d = 0;
    if (!in_cycle.contains(c)) {
      if (auto p = primary.find(c); p != primary.end()) d = depth_of(p->second) + 1;
    }
    depth[c] = d;
    return d;
  };
  for (auto c : classes) depth_of(c);

  struct Pending {
    NodeId graph_id;
    Part part;
    std::uint32_t layer;
    // sort keys within a layer
    std::size_t k1;
    std::size_t k2;
    std::size_t parent_pending;  // index into pending, npos for roots
    LeafRole role;
  };
  std::vector<Pending> pending;
  std::map<NodeId, std::size_t> trunk_pending;
  for (auto c : classes) {
    trunk_pending[c] = pending.size();
    pending.push_back(Pending{c, Part::Trunk, depth[c], c, 0, Unrt::npos, LeafRole::None});
  }
  for (auto c : classes) {
    if (in_cycle.contains(c)) continue;
    if (auto p = primary.find(c); p != primary.end()) pending[trunk_pending[c]].parent_pending = trunk_pending[p->second];
  }

  // Step 2: branches. Every Contains edge with a class ancestor yields one
  // branch under that (innermost) class.
  auto owning_class = [&](NodeId fn) -> NodeId {
    NodeId cur = fn;
    for (int guard = 0; guard < 1 << 16; ++guard) {
      auto parents = g.sources(cur, EdgeKind::Contains);
      if (parents.empty()) return kNoNode;
      cur = parents.front();
      if (nodes[cur].kind == NodeKind::Class) return cur;
    }
    return kNoNode;
  };
  std::vector<std::pair<NodeId, NodeId>> branch_list;  // (class, function)
  for (const auto& e : g.edges()) {
    if (e.kind != EdgeKind::Contains) continue;
    const auto c = owning_class(e.dst);
    if (c != kNoNode) branch_list.emplace_back(c, e.dst);
  }
  std::sort(branch_list.begin(), branch_list.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<std::size_t> branch_pending;
  for (const auto& [c, f] : branch_list) {
    branch_pending.push_back(pending.size());
    pending.push_back(Pending{f, Part::Branch, depth[c], f, 0, trunk_pending[c], LeafRole::None});
  }

  // Steps 3 and 4: one-hop callees (deduplicated per branch, call-site
  // order), then callers (one per call, caller document order).
  for (std::size_t b = 0; b < branch_list.size(); ++b) {
    const auto f = branch_list[b].second;
    const auto layer = depth[branch_list[b].first];
    std::size_t attach = 0;
    std::set<NodeId> seen;
    for (auto ei : g.out_edges(f)) {
      const auto& e = g.edges()[ei];
      if (e.kind != EdgeKind::Calls || !seen.insert(e.dst).second) continue;
      pending.push_back(Pending{e.dst, Part::Leaf, layer, f, attach++, branch_pending[b], LeafRole::Callee});
    }
    std::vector<std::pair<NodeId, std::size_t>> callers;  // (caller, call-site node)
    for (auto ei : g.in_edges(f)) {
      const auto& e = g.edges()[ei];
      if (e.kind != EdgeKind::Calls) continue;
      if (e.src == f && seen.contains(f)) continue;  // self-call already attached once
      callers.emplace_back(e.src, g.call_site(ei));
    }
    std::stable_sort(callers.begin(), callers.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [caller, site] : callers) {
      pending.push_back(Pending{caller, Part::Leaf, layer, f, attach++, branch_pending[b], LeafRole::Caller});
    }
  }

  // Search order.
  std::vector<std::size_t> order(pending.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = pending[a];
    const auto& y = pending[b];
    return std::tie(x.part, x.layer, x.k1, x.k2) < std::tie(y.part, y.layer, y.k1, y.k2);
  });
  std::vector<std::size_t> position(pending.size());
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;

  std::map<NodeId, std::uint32_t> seen_count;
  t.nodes_.resize(order.size());
  t.children_.assign(order.size(), {});
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = pending[order[i]];
    const auto& gn = nodes[p.graph_id];
    auto& u = t.nodes_[i];
    u.graph_id = p.graph_id;
    u.kind = gn.kind;
    u.name = gn.name;
    u.file = gn.file;
    u.span = gn.span;
    u.part = p.part;
    u.layer = p.layer;
    u.occurrence = seen_count[p.graph_id]++;
    u.tree = t.id_;
    u.index = i;
    u.parent = p.parent_pending == Unrt::npos ? Unrt::npos : position[p.parent_pending];
    u.role = p.role;
    u.cycle = p.part == Part::Trunk && in_cycle.contains(p.graph_id);
  }
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    if (t.nodes_[i].parent != Unrt::npos) t.children_[t.nodes_[i].parent].push_back(i);
  }
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    const auto& u = t.nodes_[i];
    if (t.groups_.empty() || t.groups_.back().part != u.part || t.groups_.back().layer != u.layer) {
      t.groups_.push_back(Unrt::Group{u.part, u.layer, i, i + 1});
    } else {
      t.groups_.back().end = i + 1;
    }
  }
  return t;
}

// Batch predicate: returns the position of the first match inside the
// batch, or nullopt when no node in the batch qualifies.
using BatchPredicate = std::function<std::optional<std::size_t>(const std::vector<const UnifiedNode*>&)>;

// Adapts a per-node predicate; evaluation stops at the first match.
inline BatchPredicate per_node(std::function<bool(const UnifiedNode&)> pred) {
  return [pred = std::move(pred)](const std::vector<const UnifiedNode*>& batch) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (pred(*batch[i])) return i;
    }
    return std::nullopt;
  };
}

class PredicateFailure : public Error {
 public:
  PredicateFailure(const UnifiedNode& node, const std::string& what)
      : Error(ErrorCode::PredicateFailure, "predicate failed at " + node.name + ": " + what), node_(node) {}
  const UnifiedNode& node() const { return node_; }

 private:
  UnifiedNode node_;
};

// Trunk -> Branch -> Leaf, layer by layer, document order; batches of at
// most n nodes never straddle a (part, layer) group.
inline std::optional<UnifiedNode> layered_search(const Unrt& t, const BatchPredicate& pred, std::size_t n = 10,
                                                 const std::vector<std::size_t>* restrict_to = nullptr) {
  if (n == 0) throw Error(ErrorCode::PreconditionViolation, "batch size must be >= 1");
  std::vector<char> allowed;
  if (restrict_to) {
    allowed.assign(t.nodes().size(), 0);
    for (auto i : *restrict_to) allowed.at(i) = 1;
  }
  for (const auto& grp : t.groups()) {
    std::vector<const UnifiedNode*> batch;
    auto flush = [&]() -> std::optional<UnifiedNode> {
      if (batch.empty()) return std::nullopt;
      std::optional<std::size_t> hit;
      try {
        hit = pred(batch);
      } catch (const PredicateFailure&) {
        throw;
      } catch (const std::exception& e) {
        throw PredicateFailure(*batch.front(), e.what());
      }
      if (hit && *hit < batch.size()) return *batch[*hit];
      batch.clear();
      return std::nullopt;
    };
    for (std::size_t i = grp.begin; i < grp.end; ++i) {
      if (restrict_to && !allowed[i]) continue;
      batch.push_back(&t.nodes()[i]);
      if (batch.size() == n) {
        if (auto r = flush()) return r;
      }
    }
    if (auto r = flush()) return r;
  }
  return std::nullopt;
}

// All occurrences strictly below node, in search order.
inline std::vector<UnifiedNode> children_of(const Unrt& t, const UnifiedNode& node) {
  if (!t.owns(node)) throw Error(ErrorCode::NodeNotInTree, "node " + node.name + " is not in this tree");
  std::vector<std::size_t> below;
  std::vector<std::size_t> stack(t.children(node.index).rbegin(), t.children(node.index).rend());
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    below.push_back(i);
    for (auto c : t.children(i)) stack.push_back(c);
  }
  std::sort(below.begin(), below.end());
  std::vector<UnifiedNode> out;
  out.reserve(below.size());
  for (auto i : below) out.push_back(t.nodes()[i]);
  return out;
}

inline std::string dump_unrt(const Unrt& t) {
  std::ostringstream out;
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int indent) {
    const auto& u = t.nodes()[i];
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << to_string(u.part) << ' ' << u.name;
    if (u.role == LeafRole::Callee) out << " (callee)";
    if (u.role == LeafRole::Caller) out << " (caller)";
    out << " [L" << u.layer << "]";
    if (!u.file.empty()) out << ' ' << u.file << ':' << u.span.start;
    if (u.cycle) out << " !inheritance-cycle";
    out << '\n';
    for (auto c : t.children(i)) rec(c, indent + 1);
  };
  for (std::size_t i = 0; i < t.nodes().size(); ++i) {
    if (t.nodes()[i].parent == Unrt::npos) rec(i, 0);
  }
  return out.str();
}

}  // namespace agentlint
