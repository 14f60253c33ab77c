// In-memory dependency graph: indexed word nodes, labeled governor->dependent
// edges, a root set and the pass-through material needed to write a sentence
// back out as CoNLL-U.

#ifndef SEMGREX_GRAPH_H_
#define SEMGREX_GRAPH_H_

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace semgrex {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sentence position of a node. copy == 0 is an ordinary token; copy >= 1 is
// an empty (copy) node that sits after token `index` (index 0 means before
// the first token). Ordered lexicographically by (index, copy).
struct NodeId {
  int index = 0;
  int copy = 0;

  constexpr NodeId() = default;
  constexpr NodeId(int index_, int copy_ = 0) : index(index_), copy(copy_) {}

  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;

  bool is_copy() const { return copy != 0; }
  // "7" or "7.1". Parse also takes "0", the HEAD of a root.
  std::string ToString() const;
  static std::optional<NodeId> Parse(std::string_view text);
};

// The pseudo-id that CoNLL-U uses for "attached to the artificial root".
inline constexpr NodeId kRootHead{0, 0};

// One key=value item from FEATS or MISC. Items without '=' keep value empty
// so that the column round-trips unchanged.
struct Feature {
  std::string key;
  std::optional<std::string> value;

  friend bool operator==(const Feature&, const Feature&) = default;
};

using FeatureList = std::vector<Feature>;

FeatureList ParseFeatureList(std::string_view column);
std::string FormatFeatureList(const FeatureList& features);

// A head reference in the layer that is not being edited (DEPS in basic mode,
// HEAD/DEPREL in enhanced mode). head == kRootHead means the artificial root.
struct HeadRef {
  NodeId head;
  std::string relation;

  friend bool operator==(const HeadRef&, const HeadRef&) = default;
};

// Inactive dependency layer carried verbatim. Either unset ("_"), a parsed
// list of head references (remapped when nodes move), or a raw column kept
// as-is because it could not be parsed.
using InactiveLayer = std::variant<std::monostate, std::vector<HeadRef>, std::string>;

struct Node {
  NodeId id;
  std::string word;
  std::optional<std::string> lemma;
  std::optional<std::string> tag;  // XPOS
  std::optional<std::string> upos;
  FeatureList feats;
  FeatureList misc;
  InactiveLayer inactive;

  // Attribute lookup by query name: word, lemma, pos/tag/xpos, upos, idx,
  // ner, feats, misc. Any other key is looked up in MISC, then FEATS.
  // Returns nullopt when the node carries no value for the key.
  std::optional<std::string> Attribute(std::string_view key) const;

  // Sets an attribute by query name. An empty value clears optional fields
  // and removes MISC keys. Throws GraphError for "idx".
  void SetAttribute(std::string_view key, std::string_view value);

  // NER is stored in MISC under "ner" or "NER".
  std::optional<std::string> ner() const;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeId gov;
  NodeId dep;
  std::string relation;

  friend auto operator<=>(const Edge&, const Edge&) = default;
  friend bool operator==(const Edge&, const Edge&) = default;

  std::string ToString() const;  // "rel(gov, dep)"
};

// A multiword-token range row ("3-4 del _ _ ..."). Columns after the ID are
// kept verbatim.
struct MultiwordToken {
  int first = 0;
  int last = 0;
  std::vector<std::string> columns;  // FORM .. MISC, 9 entries

  const std::string& form() const { return columns.at(0); }
  friend bool operator==(const MultiwordToken&, const MultiwordToken&) = default;
};

// An empty-node row that is not part of the active graph (basic mode). It is
// still renumbered with its neighbours so the written file stays consistent.
struct HiddenRow {
  NodeId id;
  std::vector<std::string> columns;  // FORM .. MISC, 9 entries; DEPS unused
  InactiveLayer deps;
  friend bool operator==(const HiddenRow&, const HiddenRow&) = default;
};

enum class Side { kBefore, kAfter };

// Old id -> new id for every node that survived a renumbering.
using IdRemap = std::map<NodeId, NodeId>;

using AttributeMap = std::map<std::string, std::string>;

class DepGraph {
 public:
  DepGraph() = default;

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  bool HasNode(NodeId id) const { return nodes_.count(id) != 0; }
  const Node& node(NodeId id) const;
  Node& mutable_node(NodeId id);

  // Construction: adds a node. Throws on duplicate id or invalid index.
  void AddNode(Node node);

  // Marks `id` as a declared root (CoNLL-U HEAD 0). `relation` is the
  // DEPREL used on the root row, normally "root".
  void DeclareRoot(NodeId id, std::string relation = "root");
  const std::map<NodeId, std::string>& declared_roots() const {
    return declared_roots_;
  }

  // Declared roots plus every node with no incoming edge.
  std::set<NodeId> roots() const;
  bool IsRoot(NodeId id) const;

  bool HasEdge(const Edge& edge) const { return edges_.count(edge) != 0; }

  // Returns true iff the edge was not already present.
  bool AddEdge(NodeId gov, NodeId dep, std::string_view relation);

  // Removes gov->dep edges with the given label, or all gov->dep edges when
  // no label is given. Returns how many were removed.
  int RemoveEdge(NodeId gov, NodeId dep,
                 std::optional<std::string_view> relation = std::nullopt);

  // Inserts a new token immediately before or after `anchor` and renumbers
  // everything behind it. `attrs` must contain "word".
  NodeId InsertNode(const AttributeMap& attrs, NodeId anchor, Side side,
                    IdRemap* remap = nullptr);

  // Removes `start` and everything it dominates that is not also reachable
  // from surviving nodes, then renumbers the rest to 1..n. Returns the
  // removed ids as they were before renumbering.
  std::set<NodeId> RemoveSubgraph(NodeId start, IdRemap* remap = nullptr);

  // Topological order with ties broken by NodeId, or plain NodeId order if
  // the edge set has a cycle.
  std::vector<NodeId> CanonicalOrder() const;

  // Incoming and outgoing edges, sorted.
  std::vector<Edge> Governors(NodeId id) const;
  std::vector<Edge> Dependents(NodeId id) const;
  std::set<NodeId> Descendants(NodeId id) const;
  std::set<NodeId> Ancestors(NodeId id) const;

  // Hard invariant violations (dangling references, self-loops, bad ids).
  // Empty means the graph is well formed.
  std::vector<std::string> CheckInvariants() const;
  // Softer findings: declared roots that acquired a governor.
  std::vector<std::string> Warnings() const;

  // Space-joined word sequence over ordinary tokens.
  std::string Text() const;

  std::vector<std::string> comments;
  std::vector<MultiwordToken> multiword_tokens;
  std::vector<HiddenRow> hidden_rows;

  friend bool operator==(const DepGraph&, const DepGraph&) = default;

 private:
  struct Slot;

  void RequireNode(NodeId id, std::string_view what) const;
  // Renumbers so ordinary tokens become 1..n in slot order and copy nodes
  // attach to the token before them. Slots not listed are dropped.
  // Returns the id given to the slot marked as new, if any.
  std::optional<NodeId> Renumber(const std::vector<Slot>& order,
                                 IdRemap* remap);

  std::map<NodeId, Node> nodes_;
  std::set<Edge> edges_;
  std::map<NodeId, std::string> declared_roots_;
};

}  // namespace semgrex

#endif  // SEMGREX_GRAPH_H_
