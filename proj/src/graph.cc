#include "semgrex/graph.h"

#include <algorithm>
#include <charconv>
#include <deque>
#include <sstream>

namespace semgrex {

namespace {

std::optional<int> ParseNonNegative(std::string_view text) {
  if (text.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    return std::nullopt;
  }
  // from_chars accepts leading zeros; reject them so ids print back unchanged.
  if (text.size() > 1 && text[0] == '0') return std::nullopt;
  return value;
}

bool IsMiscNerKey(std::string_view key) { return key == "ner" || key == "NER"; }

const std::string* FindFeature(const FeatureList& list, std::string_view key) {
  for (const Feature& f : list) {
    if (f.key == key && f.value) return &*f.value;
  }
  return nullptr;
}

void SetFeature(FeatureList& list, std::string_view key, std::string_view value) {
  auto it = std::find_if(list.begin(), list.end(),
                         [&](const Feature& f) { return f.key == key; });
  if (value.empty()) {
    if (it != list.end()) list.erase(it);
    return;
  }
  if (it != list.end()) {
    it->value = std::string(value);
  } else {
    list.push_back({std::string(key), std::string(value)});
  }
}

void SetOptional(std::optional<std::string>& field, std::string_view value) {
  if (value.empty()) {
    field.reset();
  } else {
    field = std::string(value);
  }
}

void RemapLayer(InactiveLayer& layer, const IdRemap& remap) {
  auto* refs = std::get_if<std::vector<HeadRef>>(&layer);
  if (refs == nullptr) return;
  std::vector<HeadRef> kept;
  for (HeadRef& ref : *refs) {
    if (ref.head == kRootHead) {
      kept.push_back(std::move(ref));
      continue;
    }
    auto it = remap.find(ref.head);
    if (it == remap.end()) continue;
    ref.head = it->second;
    kept.push_back(std::move(ref));
  }
  *refs = std::move(kept);
}

}  // namespace

// --- NodeId -----------------------------------------------------------------

std::string NodeId::ToString() const {
  if (copy == 0) return std::to_string(index);
  return std::to_string(index) + "." + std::to_string(copy);
}

std::optional<NodeId> NodeId::Parse(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    auto index = ParseNonNegative(text);
    if (!index) return std::nullopt;
    return NodeId(*index, 0);
  }
  auto index = ParseNonNegative(text.substr(0, dot));
  auto copy = ParseNonNegative(text.substr(dot + 1));
  if (!index || !copy || *copy == 0) return std::nullopt;
  return NodeId(*index, *copy);
}

// --- Features ----------------------------------------------------------------

FeatureList ParseFeatureList(std::string_view column) {
  FeatureList out;
  if (column.empty() || column == "_") return out;
  std::size_t start = 0;
  while (start <= column.size()) {
    std::size_t bar = column.find('|', start);
    if (bar == std::string_view::npos) bar = column.size();
    std::string_view item = column.substr(start, bar - start);
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      out.push_back({std::string(item), std::nullopt});
    } else {
      out.push_back({std::string(item.substr(0, eq)),
                     std::string(item.substr(eq + 1))});
    }
    start = bar + 1;
  }
  return out;
}

std::string FormatFeatureList(const FeatureList& features) {
  if (features.empty()) return "_";
  std::string out;
  for (const Feature& f : features) {
    if (!out.empty()) out += '|';
    out += f.key;
    if (f.value) {
      out += '=';
      out += *f.value;
    }
  }
  return out;
}

// --- Node --------------------------------------------------------------------

std::optional<std::string> Node::ner() const {
  for (const Feature& f : misc) {
    if (IsMiscNerKey(f.key) && f.value) return f.value;
  }
  return std::nullopt;
}

std::optional<std::string> Node::Attribute(std::string_view key) const {
  if (key == "word") return word;
  if (key == "lemma") return lemma;
  if (key == "pos" || key == "tag" || key == "xpos") return tag;
  if (key == "upos") return upos;
  if (key == "idx") return id.ToString();
  if (key == "ner") return ner();
  if (key == "feats") {
    if (feats.empty()) return std::nullopt;
    return FormatFeatureList(feats);
  }
  if (key == "misc") {
    if (misc.empty()) return std::nullopt;
    return FormatFeatureList(misc);
  }
  if (const std::string* v = FindFeature(misc, key)) return *v;
  if (const std::string* v = FindFeature(feats, key)) return *v;
  return std::nullopt;
}

void Node::SetAttribute(std::string_view key, std::string_view value) {
  if (key.empty()) throw GraphError("empty attribute key");
  if (key == "idx") throw GraphError("attribute 'idx' cannot be edited");
  if (key == "word") {
    word = std::string(value);
  } else if (key == "lemma") {
    SetOptional(lemma, value);
  } else if (key == "pos" || key == "tag" || key == "xpos") {
    SetOptional(tag, value);
  } else if (key == "upos") {
    SetOptional(upos, value);
  } else if (key == "feats") {
    feats = ParseFeatureList(value);
  } else if (key == "misc") {
    misc = ParseFeatureList(value);
  } else if (key == "ner") {
    auto it = std::find_if(misc.begin(), misc.end(),
                           [](const Feature& f) { return IsMiscNerKey(f.key); });
    SetFeature(misc, it != misc.end() ? it->key : std::string("ner"), value);
  } else {
    SetFeature(misc, key, value);
  }
}

std::string Edge::ToString() const {
  return relation + "(" + gov.ToString() + ", " + dep.ToString() + ")";
}

// --- DepGraph ----------------------------------------------------------------

struct DepGraph::Slot {
  enum Kind { kNode, kHidden, kNew };
  NodeId old_id;
  Kind kind = kNode;
};

void DepGraph::RequireNode(NodeId id, std::string_view what) const {
  if (!HasNode(id)) {
    throw GraphError(std::string(what) + ": unknown node " + id.ToString());
  }
}

const Node& DepGraph::node(NodeId id) const {
  RequireNode(id, "node");
  return nodes_.at(id);
}

Node& DepGraph::mutable_node(NodeId id) {
  RequireNode(id, "node");
  return nodes_.at(id);
}

void DepGraph::AddNode(Node node) {
  const NodeId id = node.id;
  if (id.copy < 0 || id.index < 0 || (id.copy == 0 && id.index < 1)) {
    throw GraphError("invalid node id " + id.ToString());
  }
  if (!nodes_.emplace(id, std::move(node)).second) {
    throw GraphError("duplicate node id " + id.ToString());
  }
}

void DepGraph::DeclareRoot(NodeId id, std::string relation) {
  RequireNode(id, "declare root");
  declared_roots_[id] = std::move(relation);
}

std::set<NodeId> DepGraph::roots() const {
  std::set<NodeId> out;
  for (const auto& [id, rel] : declared_roots_) out.insert(id);
  std::set<NodeId> has_gov;
  for (const Edge& e : edges_) has_gov.insert(e.dep);
  for (const auto& [id, node] : nodes_) {
    if (!has_gov.count(id)) out.insert(id);
  }
  return out;
}

bool DepGraph::IsRoot(NodeId id) const {
  if (declared_roots_.count(id)) return true;
  if (!HasNode(id)) return false;
  return std::none_of(edges_.begin(), edges_.end(),
                      [&](const Edge& e) { return e.dep == id; });
}

bool DepGraph::AddEdge(NodeId gov, NodeId dep, std::string_view relation) {
  RequireNode(gov, "add edge");
  RequireNode(dep, "add edge");
  if (gov == dep) {
    throw GraphError("add edge: self-loop on node " + gov.ToString());
  }
  if (relation.empty()) throw GraphError("add edge: empty relation");
  return edges_.insert(Edge{gov, dep, std::string(relation)}).second;
}

int DepGraph::RemoveEdge(NodeId gov, NodeId dep,
                         std::optional<std::string_view> relation) {
  RequireNode(gov, "remove edge");
  RequireNode(dep, "remove edge");
  int removed = 0;
  for (auto it = edges_.lower_bound(Edge{gov, dep, ""});
       it != edges_.end() && it->gov == gov && it->dep == dep;) {
    if (!relation || it->relation == *relation) {
      it = edges_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::optional<NodeId> DepGraph::Renumber(const std::vector<Slot>& order,
                                         IdRemap* remap_out) {
  IdRemap remap;
  std::optional<NodeId> new_id;
  int token = 0;
  std::map<int, int> copies;
  for (const Slot& slot : order) {
    NodeId assigned;
    if (slot.kind == Slot::kNew || (slot.kind == Slot::kNode && slot.old_id.copy == 0)) {
      assigned = NodeId(++token, 0);
    } else {
      assigned = NodeId(token, ++copies[token]);
    }
    if (slot.kind == Slot::kNew) {
      new_id = assigned;
    } else {
      remap[slot.old_id] = assigned;
    }
  }

  std::map<NodeId, Node> nodes;
  for (auto& [id, node] : nodes_) {
    auto it = remap.find(id);
    if (it == remap.end()) continue;
    node.id = it->second;
    RemapLayer(node.inactive, remap);
    nodes.emplace(it->second, std::move(node));
  }
  nodes_ = std::move(nodes);

  std::set<Edge> edges;
  for (const Edge& e : edges_) {
    auto g = remap.find(e.gov);
    auto d = remap.find(e.dep);
    if (g == remap.end() || d == remap.end()) continue;
    edges.insert(Edge{g->second, d->second, e.relation});
  }
  edges_ = std::move(edges);

  std::map<NodeId, std::string> declared;
  for (auto& [id, rel] : declared_roots_) {
    auto it = remap.find(id);
    if (it != remap.end()) declared.emplace(it->second, std::move(rel));
  }
  declared_roots_ = std::move(declared);

  std::vector<HiddenRow> hidden;
  for (HiddenRow& row : hidden_rows) {
    auto it = remap.find(row.id);
    if (it == remap.end()) continue;
    row.id = it->second;
    RemapLayer(row.deps, remap);
    hidden.push_back(std::move(row));
  }
  hidden_rows = std::move(hidden);

  std::vector<MultiwordToken> spans;
  for (MultiwordToken& span : multiword_tokens) {
    int lo = 0, hi = 0, kept = 0;
    for (int i = span.first; i <= span.last; ++i) {
      auto it = remap.find(NodeId(i, 0));
      if (it == remap.end()) continue;
      if (kept++ == 0) lo = it->second.index;
      hi = it->second.index;
    }
    if (kept < 2) continue;
    span.first = lo;
    span.last = hi;
    spans.push_back(std::move(span));
  }
  multiword_tokens = std::move(spans);

  if (remap_out != nullptr) *remap_out = std::move(remap);
  return new_id;
}

NodeId DepGraph::InsertNode(const AttributeMap& attrs, NodeId anchor, Side side,
                            IdRemap* remap) {
  RequireNode(anchor, "insert node");
  if (!attrs.count("word")) throw GraphError("insert node: attribute 'word' is required");
  Node fresh;
  for (const auto& [key, value] : attrs) fresh.SetAttribute(key, value);

  std::vector<Slot> order;
  for (const auto& [id, node] : nodes_) order.push_back({id, Slot::kNode});
  for (const HiddenRow& row : hidden_rows) order.push_back({row.id, Slot::kHidden});
  std::stable_sort(order.begin(), order.end(),
                   [](const Slot& a, const Slot& b) { return a.old_id < b.old_id; });

  // Before: ahead of the anchor. After: behind the anchor and any copy nodes
  // that hang off it.
  auto pos = std::find_if(order.begin(), order.end(), [&](const Slot& s) {
    if (side == Side::kBefore) return s.old_id >= anchor;
    if (s.old_id <= anchor) return false;
    return !(anchor.copy == 0 && s.old_id.index == anchor.index);
  });
  order.insert(pos, Slot{NodeId(), Slot::kNew});

  NodeId id = *Renumber(order, remap);
  fresh.id = id;
  nodes_.emplace(id, std::move(fresh));
  return id;
}

std::set<NodeId> DepGraph::RemoveSubgraph(NodeId start, IdRemap* remap) {
  RequireNode(start, "remove subgraph");
  std::set<NodeId> doomed = Descendants(start);
  doomed.insert(start);

  // Anything still reachable from surviving material (without passing
  // through `start`) stays.
  std::deque<NodeId> queue;
  std::set<NodeId> reached;
  for (const auto& [id, node] : nodes_) {
    if (!doomed.count(id)) {
      reached.insert(id);
      queue.push_back(id);
    }
  }
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    for (const Edge& e : Dependents(cur)) {
      if (e.dep == start || reached.count(e.dep)) continue;
      reached.insert(e.dep);
      queue.push_back(e.dep);
    }
  }
  std::set<NodeId> removed;
  for (NodeId id : doomed) {
    if (id == start || !reached.count(id)) removed.insert(id);
  }

  std::vector<Slot> order;
  for (const auto& [id, node] : nodes_) {
    if (!removed.count(id)) order.push_back({id, Slot::kNode});
  }
  for (const HiddenRow& row : hidden_rows) order.push_back({row.id, Slot::kHidden});
  std::stable_sort(order.begin(), order.end(),
                   [](const Slot& a, const Slot& b) { return a.old_id < b.old_id; });
  Renumber(order, remap);
  return removed;
}

std::vector<NodeId> DepGraph::CanonicalOrder() const {
  std::map<NodeId, int> indegree;
  for (const auto& [id, node] : nodes_) indegree[id] = 0;
  for (const Edge& e : edges_) ++indegree[e.dep];

  // Parallel edges with different labels count separately on both sides.
  std::set<NodeId> frontier;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) frontier.insert(id);
  }
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  while (!frontier.empty()) {
    NodeId cur = *frontier.begin();
    frontier.erase(frontier.begin());
    order.push_back(cur);
    for (const Edge& e : Dependents(cur)) {
      if (--indegree[e.dep] == 0) frontier.insert(e.dep);
    }
  }
  if (order.size() != nodes_.size()) {
    order.clear();
    for (const auto& [id, node] : nodes_) order.push_back(id);
  }
  return order;
}

std::vector<Edge> DepGraph::Governors(NodeId id) const {
  RequireNode(id, "governors");
  std::vector<Edge> out;
  for (const Edge& e : edges_) {
    if (e.dep == id) out.push_back(e);
  }
  return out;
}

std::vector<Edge> DepGraph::Dependents(NodeId id) const {
  RequireNode(id, "dependents");
  std::vector<Edge> out;
  for (auto it = edges_.lower_bound(Edge{id, NodeId(-1, -1), ""});
       it != edges_.end() && it->gov == id; ++it) {
    out.push_back(*it);
  }
  return out;
}

std::set<NodeId> DepGraph::Descendants(NodeId id) const {
  RequireNode(id, "descendants");
  std::set<NodeId> seen;
  std::deque<NodeId> queue{id};
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    for (const Edge& e : Dependents(cur)) {
      if (seen.insert(e.dep).second) queue.push_back(e.dep);
    }
  }
  return seen;
}

std::set<NodeId> DepGraph::Ancestors(NodeId id) const {
  RequireNode(id, "ancestors");
  std::map<NodeId, std::vector<NodeId>> up;
  for (const Edge& e : edges_) up[e.dep].push_back(e.gov);
  std::set<NodeId> seen;
  std::deque<NodeId> queue{id};
  while (!queue.empty()) {
    NodeId cur = queue.front();
    queue.pop_front();
    for (NodeId gov : up[cur]) {
      if (seen.insert(gov).second) queue.push_back(gov);
    }
  }
  return seen;
}

std::vector<std::string> DepGraph::CheckInvariants() const {
  std::vector<std::string> problems;
  for (const auto& [id, node] : nodes_) {
    if (node.id != id) {
      problems.push_back("node keyed " + id.ToString() + " carries id " +
                         node.id.ToString());
    }
    if (id.copy < 0 || id.index < 0 || (id.copy == 0 && id.index < 1)) {
      problems.push_back("invalid node id " + id.ToString());
    }
  }
  for (const Edge& e : edges_) {
    if (!HasNode(e.gov) || !HasNode(e.dep)) {
      problems.push_back("dangling edge " + e.ToString());
    }
    if (e.gov == e.dep) problems.push_back("self-loop " + e.ToString());
    if (e.relation.empty()) problems.push_back("unlabeled edge " + e.ToString());
  }
  for (const auto& [id, rel] : declared_roots_) {
    if (!HasNode(id)) problems.push_back("root " + id.ToString() + " is not a node");
  }
  if (!nodes_.empty() && roots().empty()) problems.push_back("graph has no root");
  // Ordinary tokens must be numbered 1..n without gaps.
  int expected = 1;
  for (const auto& [id, node] : nodes_) {
    if (id.copy != 0) continue;
    if (id.index != expected) {
      problems.push_back("token numbering gap at " + id.ToString());
      break;
    }
    ++expected;
  }
  return problems;
}

std::vector<std::string> DepGraph::Warnings() const {
  std::vector<std::string> out;
  for (const auto& [id, rel] : declared_roots_) {
    for (const Edge& e : edges_) {
      if (e.dep == id) {
        out.push_back("declared root " + id.ToString() + " has governor " +
                      e.ToString());
      }
    }
  }
  return out;
}

std::string DepGraph::Text() const {
  std::string out;
  for (const auto& [id, node] : nodes_) {
    if (id.copy != 0) continue;
    if (!out.empty()) out += ' ';
    out += node.word;
  }
  return out;
}

}  // namespace semgrex
