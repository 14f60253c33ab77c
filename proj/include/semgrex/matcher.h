// Match enumeration for Semgrex patterns over a DepGraph.

#ifndef SEMGREX_MATCHER_H_
#define SEMGREX_MATCHER_H_

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semgrex/graph.h"
#include "semgrex/pattern.h"

namespace semgrex {

struct Match {
  NodeId anchor;
  std::map<std::string, NodeId> nodes;
  std::map<std::string, Edge> edges;
  // Node bound to each pattern node outside negation, in pattern preorder
  // (the anchor first). Empty for nodes in an Or branch that was not taken.
  // Anonymous pattern nodes only show up here, so "{$} > {}" gives one
  // match per dependent of the root.
  std::vector<std::optional<NodeId>> assignment;

  friend auto operator<=>(const Match&, const Match&) = default;
  friend bool operator==(const Match&, const Match&) = default;
};

// Deduplicated on the full Match, in discovery order: anchors in canonical order, then
// depth-first over constraints in textual order with candidates in canonical
// order.
using MatchSet = std::vector<Match>;

struct RelationResult {
  bool satisfied = false;
  // Edges that witness the relation, sorted. Empty for order-only and
  // sister operators.
  std::vector<Edge> witnesses;
};

// Truth of `a OP b`. Word order compares positions in NodeId order, where
// "immediately" means adjacent in that order. A label on a chain operator
// must match every edge of at least one connecting path; the witness is
// the last edge of such a path. Labels on operators without edges are
// ignored (the parser rejects them).
RelationResult EvaluateRelation(const DepGraph& graph, RelOp op, NodeId a, NodeId b,
                                const StringTest* label = nullptr);

// Whether `id` satisfies the node description, including negation.
bool DescriptionMatches(const DepGraph& graph, const NodeDesc& desc, NodeId id);

MatchSet FindMatches(const DepGraph& graph, const Pattern& pattern);

// Matches whose anchor is `anchor`. Throws GraphError for an unknown node.
MatchSet MatchesAt(const DepGraph& graph, const Pattern& pattern, NodeId anchor);

}  // namespace semgrex

#endif  // SEMGREX_MATCHER_H_
