#include "semgrex/matcher.h"

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <utility>

namespace semgrex {

namespace {

bool LabelOk(const StringTest* label, const Edge& e) {
  return label == nullptr || label->Matches(e.relation);
}

// Read-only lookup tables over one graph, built once per search.
class GraphIndex {
 public:
  explicit GraphIndex(const DepGraph& graph) : graph_(graph) {
    int pos = 0;
    for (const auto& [id, node] : graph.nodes()) position_[id] = pos++;
    order_ = graph.CanonicalOrder();
    for (std::size_t i = 0; i < order_.size(); ++i) canonical_rank_[order_[i]] = i;
    for (const Edge& e : graph.edges()) {
      out_[e.gov].push_back(&e);
      in_[e.dep].push_back(&e);
    }
    roots_ = graph.roots();
  }

  const DepGraph& graph() const { return graph_; }
  const std::vector<NodeId>& canonical_order() const { return order_; }
  std::size_t rank(NodeId id) const { return canonical_rank_.at(id); }
  int position(NodeId id) const { return position_.at(id); }
  bool is_root(NodeId id) const { return roots_.count(id) != 0; }

  const std::vector<const Edge*>& out(NodeId id) const { return Lookup(out_, id); }
  const std::vector<const Edge*>& in(NodeId id) const { return Lookup(in_, id); }

  // Nodes reachable from `id` by one or more edges whose labels all match.
  std::set<NodeId> Reachable(NodeId id, const StringTest* label, bool downward) const {
    std::set<NodeId> seen;
    std::deque<NodeId> queue{id};
    while (!queue.empty()) {
      NodeId cur = queue.front();
      queue.pop_front();
      for (const Edge* e : downward ? out(cur) : in(cur)) {
        if (!LabelOk(label, *e)) continue;
        NodeId next = downward ? e->dep : e->gov;
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
    return seen;
  }

 private:
  using Adjacency = std::map<NodeId, std::vector<const Edge*>>;
  static const std::vector<const Edge*>& Lookup(const Adjacency& adj, NodeId id) {
    static const std::vector<const Edge*> kNone;
    auto it = adj.find(id);
    return it == adj.end() ? kNone : it->second;
  }

  const DepGraph& graph_;
  std::map<NodeId, int> position_;
  std::vector<NodeId> order_;
  std::map<NodeId, std::size_t> canonical_rank_;
  Adjacency out_;
  Adjacency in_;
  std::set<NodeId> roots_;
};

bool OrderHolds(RelOp op, int pa, int pb) {
  switch (op) {
    case RelOp::kImmediatelyPrecedes:
    case RelOp::kSisterImmediatelyPrecedes:
      return pa == pb - 1;
    case RelOp::kImmediatelyFollows:
    case RelOp::kSisterImmediatelyFollows:
      return pa == pb + 1;
    case RelOp::kPrecedes:
    case RelOp::kSisterPrecedes:
    case RelOp::kGovernorOfRight:
    case RelOp::kDependentOfRight:
      return pa < pb;
    case RelOp::kFollows:
    case RelOp::kSisterFollows:
    case RelOp::kGovernorOfLeft:
    case RelOp::kDependentOfLeft:
      return pa > pb;
    default:
      return true;
  }
}

struct Candidate {
  NodeId node;
  std::optional<Edge> edge;
};

// Every b with `a OP b`, paired with each witness edge, in canonical order.
std::vector<Candidate> Candidates(const GraphIndex& index, RelOp op, NodeId a,
                                  const StringTest* label, bool with_edges) {
  std::vector<Candidate> out;
  auto add = [&](NodeId b, const Edge* e) {
    if (!OrderHolds(op, index.position(a), index.position(b))) return;
    out.push_back({b, with_edges && e ? std::optional<Edge>(*e) : std::nullopt});
  };

  switch (op) {
    case RelOp::kGovernorOf:
    case RelOp::kGovernorOfRight:
    case RelOp::kGovernorOfLeft:
      for (const Edge* e : index.out(a)) {
        if (LabelOk(label, *e)) add(e->dep, e);
      }
      break;
    case RelOp::kDependentOf:
    case RelOp::kDependentOfRight:
    case RelOp::kDependentOfLeft:
      for (const Edge* e : index.in(a)) {
        if (LabelOk(label, *e)) add(e->gov, e);
      }
      break;
    case RelOp::kAncestorOf: {
      std::set<NodeId> from = index.Reachable(a, label, /*downward=*/true);
      from.insert(a);
      for (NodeId x : from) {
        for (const Edge* e : index.out(x)) {
          if (LabelOk(label, *e)) add(e->dep, e);
        }
      }
      break;
    }
    case RelOp::kDescendantOf:
      for (const Edge* e : index.in(a)) {
        if (!LabelOk(label, *e)) continue;
        std::set<NodeId> tops = index.Reachable(e->gov, label, /*downward=*/false);
        tops.insert(e->gov);
        for (NodeId b : tops) add(b, e);
      }
      break;
    case RelOp::kSisterImmediatelyPrecedes:
    case RelOp::kSisterImmediatelyFollows:
    case RelOp::kSisterPrecedes:
    case RelOp::kSisterFollows:
      for (const Edge* up : index.in(a)) {
        for (const Edge* down : index.out(up->gov)) {
          if (down->dep != a) add(down->dep, nullptr);
        }
      }
      break;
    default:
      for (NodeId b : index.canonical_order()) add(b, nullptr);
      break;
  }

  std::sort(out.begin(), out.end(), [&](const Candidate& x, const Candidate& y) {
    auto rx = index.rank(x.node), ry = index.rank(y.node);
    if (rx != ry) return rx < ry;
    return x.edge < y.edge;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Candidate& x, const Candidate& y) {
                          return x.node == y.node && x.edge == y.edge;
                        }),
            out.end());
  return out;
}

bool DescOk(const GraphIndex& index, const NodeDesc& desc, NodeId id) {
  bool ok;
  if (desc.root_anchor) {
    ok = index.is_root(id);
  } else {
    const Node& node = index.graph().node(id);
    ok = std::all_of(desc.tests.begin(), desc.tests.end(), [&](const AttrTest& t) {
      auto value = node.Attribute(t.key);
      return value && t.value.Matches(*value);
    });
  }
  return ok != desc.negated;
}

class Search {
 public:
  Search(const GraphIndex& index, const PatternNode& root, MatchSet& out)
      : index_(index), root_(root), out_(out) {
    Number(root);
    assignment_.resize(slot_.size());
  }

  void RunAnchor(NodeId anchor) {
    MatchNode(root_, anchor, [&] { Emit(anchor); });
  }

 private:
  using Cont = std::function<void()>;

  struct Deferred {
    NodeId self;
    const IdentityTest* test;
  };

  // Preorder numbering of pattern nodes; targets of negated relations are
  // left out since they never appear in a match.
  void Number(const PatternNode& p) {
    slot_.emplace(&p, slot_.size());
    for (const Constraint& c : p.constraints) NumberConstraint(c);
  }

  void NumberConstraint(const Constraint& c) {
    if (const auto* rel = std::get_if<Relation>(&c.expr)) {
      if (!rel->negated) Number(*rel->target);
    } else if (const auto* conj = std::get_if<AndExpr>(&c.expr)) {
      for (const Constraint& t : conj->terms) NumberConstraint(t);
    } else if (const auto* alt = std::get_if<OrExpr>(&c.expr)) {
      for (const Constraint& t : alt->branches) NumberConstraint(t);
    }
  }

  void MatchNode(const PatternNode& p, NodeId n, const Cont& k) {
    if (stop_ || !DescOk(index_, p.desc, n)) return;
    auto slot = slot_.find(&p);
    if (slot != slot_.end()) {
      auto saved = assignment_[slot->second];
      assignment_[slot->second] = n;
      BindAndMatch(p, n, k);
      assignment_[slot->second] = saved;
      return;
    }
    BindAndMatch(p, n, k);
  }

  void BindAndMatch(const PatternNode& p, NodeId n, const Cont& k) {
    if (!p.desc.name) {
      MatchTerms(p.constraints, 0, n, k);
      return;
    }
    auto it = nodes_.find(*p.desc.name);
    if (it != nodes_.end()) {
      if (it->second == n) MatchTerms(p.constraints, 0, n, k);
      return;
    }
    nodes_.emplace(*p.desc.name, n);
    MatchTerms(p.constraints, 0, n, k);
    nodes_.erase(*p.desc.name);
  }

  void MatchTerms(const std::vector<Constraint>& terms, std::size_t i, NodeId self,
                  const Cont& k) {
    if (stop_) return;
    if (i == terms.size()) {
      k();
      return;
    }
    MatchConstraint(terms[i], self, [&] { MatchTerms(terms, i + 1, self, k); });
  }

  void MatchConstraint(const Constraint& c, NodeId self, const Cont& k) {
    if (const auto* rel = std::get_if<Relation>(&c.expr)) {
      MatchRelation(*rel, self, k);
    } else if (const auto* id = std::get_if<IdentityTest>(&c.expr)) {
      auto it = nodes_.find(id->name);
      if (it != nodes_.end()) {
        if ((it->second == self) == id->equal) k();
        return;
      }
      if (probing_ > 0) {
        if (!id->equal) k();
        return;
      }
      deferred_.push_back({self, id});
      k();
      deferred_.pop_back();
    } else if (const auto* conj = std::get_if<AndExpr>(&c.expr)) {
      MatchTerms(conj->terms, 0, self, k);
    } else {
      for (const Constraint& branch : std::get<OrExpr>(c.expr).branches) {
        MatchConstraint(branch, self, k);
      }
    }
  }

  void MatchRelation(const Relation& rel, NodeId self, const Cont& k) {
    const StringTest* label = rel.label ? &*rel.label : nullptr;
    if (rel.negated) {
      // Checked once every name is bound, since an identity test inside
      // the negated part may refer to a node bound further on.
      if (probing_ > 0) {
        if (!Exists(rel, self)) k();
        return;
      }
      negations_.push_back({self, &rel});
      k();
      negations_.pop_back();
      return;
    }
    for (const Candidate& cand :
         Candidates(index_, rel.op, self, label, rel.edge_name.has_value())) {
      if (stop_) return;
      if (!rel.edge_name) {
        MatchNode(*rel.target, cand.node, k);
        continue;
      }
      auto it = edges_.find(*rel.edge_name);
      if (it != edges_.end()) {
        if (it->second == *cand.edge) MatchNode(*rel.target, cand.node, k);
        continue;
      }
      edges_.emplace(*rel.edge_name, *cand.edge);
      MatchNode(*rel.target, cand.node, k);
      edges_.erase(*rel.edge_name);
    }
  }

  // Names are never bound under negation, so this cannot disturb bindings.
  bool Exists(const Relation& rel, NodeId self) {
    const StringTest* label = rel.label ? &*rel.label : nullptr;
    bool found = false;
    ++probing_;
    for (const Candidate& cand : Candidates(index_, rel.op, self, label, false)) {
      MatchNode(*rel.target, cand.node, [&] {
        found = true;
        stop_ = true;
      });
      if (found) break;
    }
    --probing_;
    stop_ = false;
    return found;
  }

  void Emit(NodeId anchor) {
    for (const Deferred& d : deferred_) {
      auto it = nodes_.find(d.test->name);
      bool same = it != nodes_.end() && it->second == d.self;
      if (same != d.test->equal) return;
    }
    for (const auto& [self, rel] : negations_) {
      if (Exists(*rel, self)) return;
    }
    Match m{anchor, nodes_, edges_, assignment_};
    if (seen_.insert(m).second) out_.push_back(std::move(m));
  }

  const GraphIndex& index_;
  const PatternNode& root_;
  MatchSet& out_;
  std::set<Match> seen_;
  std::map<std::string, NodeId> nodes_;
  std::map<std::string, Edge> edges_;
  std::vector<Deferred> deferred_;
  std::vector<std::pair<NodeId, const Relation*>> negations_;
  int probing_ = 0;  // > 0 inside an existence check
  std::map<const PatternNode*, std::size_t> slot_;
  std::vector<std::optional<NodeId>> assignment_;
  bool stop_ = false;
};

}  // namespace

RelationResult EvaluateRelation(const DepGraph& graph, RelOp op, NodeId a, NodeId b,
                                const StringTest* label) {
  if (!graph.HasNode(a) || !graph.HasNode(b)) {
    throw GraphError("evaluate relation: unknown node " +
                     (graph.HasNode(a) ? b : a).ToString());
  }
  if (!IsEdgeOperator(op)) label = nullptr;
  GraphIndex index(graph);
  RelationResult result;
  for (const Candidate& c : Candidates(index, op, a, label, /*with_edges=*/true)) {
    if (c.node != b) continue;
    result.satisfied = true;
    if (c.edge) result.witnesses.push_back(*c.edge);
  }
  std::sort(result.witnesses.begin(), result.witnesses.end());
  return result;
}

bool DescriptionMatches(const DepGraph& graph, const NodeDesc& desc, NodeId id) {
  GraphIndex index(graph);
  return DescOk(index, desc, id);
}

MatchSet FindMatches(const DepGraph& graph, const Pattern& pattern) {
  GraphIndex index(graph);
  MatchSet out;
  Search search(index, pattern.root(), out);
  for (NodeId anchor : index.canonical_order()) search.RunAnchor(anchor);
  return out;
}

MatchSet MatchesAt(const DepGraph& graph, const Pattern& pattern, NodeId anchor) {
  if (!graph.HasNode(anchor)) {
    throw GraphError("matches at: unknown node " + anchor.ToString());
  }
  GraphIndex index(graph);
  MatchSet out;
  Search search(index, pattern.root(), out);
  search.RunAnchor(anchor);
  return out;
}

}  // namespace semgrex
