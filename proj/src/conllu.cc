#include "semgrex/conllu.h"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <tuple>

namespace semgrex {

namespace {

constexpr int kColumns = 10;

enum Column { kId, kForm, kLemma, kUpos, kXpos, kFeats, kHead, kDeprel, kDeps, kMisc };

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<std::string> Optional(std::string_view column) {
  if (column == "_") return std::nullopt;
  return std::string(column);
}

std::string OrUnderscore(const std::optional<std::string>& value) {
  return value ? *value : std::string("_");
}

// "4:nsubj|7.1:conj" -> head refs; nullopt on malformed input.
std::optional<std::vector<HeadRef>> ParseDeps(std::string_view column) {
  std::vector<HeadRef> out;
  std::size_t start = 0;
  while (start <= column.size()) {
    std::size_t bar = column.find('|', start);
    if (bar == std::string_view::npos) bar = column.size();
    std::string_view item = column.substr(start, bar - start);
    std::size_t colon = item.find(':');
    if (colon == std::string_view::npos || colon + 1 == item.size()) return std::nullopt;
    auto head = NodeId::Parse(item.substr(0, colon));
    if (!head) return std::nullopt;
    out.push_back({*head, std::string(item.substr(colon + 1))});
    start = bar + 1;
  }
  return out;
}

std::string FormatDeps(const std::vector<HeadRef>& refs) {
  if (refs.empty()) return "_";
  std::string out;
  for (const HeadRef& r : refs) {
    if (!out.empty()) out += '|';
    out += r.head.ToString() + ":" + r.relation;
  }
  return out;
}

InactiveLayer ParseInactiveDeps(std::string_view column) {
  if (column == "_") return std::monostate{};
  if (auto refs = ParseDeps(column)) return std::move(*refs);
  return std::string(column);
}

InactiveLayer ParseInactiveHead(std::string_view head, std::string_view deprel) {
  if (head == "_" && deprel == "_") return std::monostate{};
  auto id = NodeId::Parse(head);
  if (id && id->copy == 0 && deprel != "_") {
    return std::vector<HeadRef>{{*id, std::string(deprel)}};
  }
  return std::string(head) + "\t" + std::string(deprel);
}

struct Row {
  int line = 0;
  std::vector<std::string_view> cols;
};

struct Block {
  std::vector<std::string> comments;
  std::vector<Row> rows;
};

class SentenceBuilder {
 public:
  SentenceBuilder(GraphMode mode, const std::string& source)
      : mode_(mode), source_(source) {}

  DepGraph Build(Block& block) {
    DepGraph graph;
    graph.comments = std::move(block.comments);
    std::map<NodeId, const Row*> by_id;
    std::vector<const Row*> tokens;
    std::vector<const Row*> empties;
    std::set<std::pair<int, int>> ranges;
    for (const Row& row : block.rows) {
      std::string_view id = row.cols[kId];
      if (auto dash = id.find('-'); dash != std::string_view::npos) {
        auto first = NodeId::Parse(id.substr(0, dash));
        auto last = NodeId::Parse(id.substr(dash + 1));
        if (!first || !last || first->copy || last->copy || first->index < 1 ||
            last->index < first->index) {
          Fail(row, "malformed multiword range '" + std::string(id) + "'");
        }
        if (!ranges.insert({first->index, last->index}).second) {
          Fail(row, "duplicate ID " + std::string(id));
        }
        MultiwordToken span;
        span.first = first->index;
        span.last = last->index;
        for (int c = kForm; c < kColumns; ++c) span.columns.emplace_back(row.cols[c]);
        graph.multiword_tokens.push_back(std::move(span));
        continue;
      }
      auto parsed = NodeId::Parse(id);
      if (!parsed || (parsed->copy == 0 && parsed->index < 1)) {
        Fail(row, "malformed ID '" + std::string(id) + "'");
      }
      if (!by_id.emplace(*parsed, &row).second) {
        Fail(row, "duplicate ID " + std::string(id));
      }
      (parsed->copy ? empties : tokens).push_back(&row);
    }
    std::sort(graph.multiword_tokens.begin(), graph.multiword_tokens.end(),
              [](const MultiwordToken& a, const MultiwordToken& b) {
                return std::tie(a.first, a.last) < std::tie(b.first, b.last);
              });

    for (const auto& [id, row] : by_id) {
      if (id.copy && mode_ == GraphMode::kBasic) {
        HiddenRow hidden;
        hidden.id = id;
        for (int c = kForm; c < kColumns; ++c) hidden.columns.emplace_back(row->cols[c]);
        hidden.deps = ParseInactiveDeps(row->cols[kDeps]);
        graph.hidden_rows.push_back(std::move(hidden));
        continue;
      }
      Node node;
      node.id = id;
      node.word = std::string(row->cols[kForm]);
      node.lemma = Optional(row->cols[kLemma]);
      node.upos = Optional(row->cols[kUpos]);
      node.tag = Optional(row->cols[kXpos]);
      node.feats = ParseFeatureList(row->cols[kFeats]);
      node.misc = ParseFeatureList(row->cols[kMisc]);
      node.inactive = mode_ == GraphMode::kBasic
                          ? ParseInactiveDeps(row->cols[kDeps])
                          : ParseInactiveHead(row->cols[kHead], row->cols[kDeprel]);
      graph.AddNode(std::move(node));
    }

    for (const auto& [id, row] : by_id) {
      if (!graph.HasNode(id)) continue;
      if (mode_ == GraphMode::kBasic) {
        AddBasicHead(graph, id, *row);
      } else {
        AddEnhancedHeads(graph, id, *row);
      }
    }
    if (graph.declared_roots().empty()) {
      Fail(block.rows.front(), mode_ == GraphMode::kBasic
                                   ? "sentence has no HEAD 0 root"
                                   : "sentence has no 0:root in DEPS");
    }
    return graph;
  }

  [[noreturn]] void Fail(const Row& row, const std::string& message) const {
    throw ConlluError(source_, row.line, message);
  }

 private:
  void AddBasicHead(DepGraph& graph, NodeId id, const Row& row) {
    auto head = NodeId::Parse(row.cols[kHead]);
    if (!head || head->copy) {
      Fail(row, "non-integer HEAD '" + std::string(row.cols[kHead]) + "'");
    }
    std::string deprel(row.cols[kDeprel]);
    if (*head == kRootHead) {
      graph.DeclareRoot(id, deprel);
      return;
    }
    Link(graph, *head, id, deprel, row);
  }

  void AddEnhancedHeads(DepGraph& graph, NodeId id, const Row& row) {
    std::string_view column = row.cols[kDeps];
    if (column == "_") return;
    auto refs = ParseDeps(column);
    if (!refs) Fail(row, "malformed DEPS '" + std::string(column) + "'");
    for (const HeadRef& ref : *refs) {
      if (ref.head == kRootHead) {
        graph.DeclareRoot(id, ref.relation);
      } else {
        Link(graph, ref.head, id, ref.relation, row);
      }
    }
  }

  void Link(DepGraph& graph, NodeId gov, NodeId dep, const std::string& rel,
            const Row& row) {
    if (!graph.HasNode(gov)) {
      Fail(row, "HEAD references missing ID " + gov.ToString());
    }
    if (gov == dep) Fail(row, "node " + dep.ToString() + " governs itself");
    if (rel.empty() || rel == "_") {
      Fail(row, "missing relation for head " + gov.ToString());
    }
    graph.AddEdge(gov, dep, rel);
  }

  GraphMode mode_;
  const std::string& source_;
};

std::string JoinRow(const std::string& id, const std::vector<std::string>& cols) {
  std::string out = id;
  for (const std::string& c : cols) {
    out += '\t';
    out += c;
  }
  return out;
}

std::string FormatInactiveHead(const InactiveLayer& layer) {
  if (const auto* refs = std::get_if<std::vector<HeadRef>>(&layer)) {
    if (refs->empty()) return "_\t_";
    return refs->front().head.ToString() + "\t" + refs->front().relation;
  }
  if (const auto* raw = std::get_if<std::string>(&layer)) return *raw;
  return "_\t_";
}

std::string FormatInactiveDeps(const InactiveLayer& layer) {
  if (const auto* refs = std::get_if<std::vector<HeadRef>>(&layer)) {
    return FormatDeps(*refs);
  }
  if (const auto* raw = std::get_if<std::string>(&layer)) return *raw;
  return "_";
}

std::string NodeRow(const DepGraph& graph, const Node& node, GraphMode mode) {
  std::string head_cols;
  std::string deps;
  std::vector<Edge> govs = graph.Governors(node.id);
  auto root = graph.declared_roots().find(node.id);
  if (mode == GraphMode::kBasic) {
    if (govs.size() > 1) {
      throw GraphError("node " + node.id.ToString() + " (" + node.word + ") has " +
                       std::to_string(govs.size()) +
                       " governors; write it in enhanced mode");
    }
    if (govs.size() == 1) {
      head_cols = govs.front().gov.ToString() + "\t" + govs.front().relation;
    } else {
      head_cols = "0\t" + (root != graph.declared_roots().end() ? root->second
                                                               : std::string("root"));
    }
    deps = FormatInactiveDeps(node.inactive);
  } else {
    std::vector<HeadRef> refs;
    if (root != graph.declared_roots().end()) refs.push_back({kRootHead, root->second});
    for (const Edge& e : govs) refs.push_back({e.gov, e.relation});
    deps = FormatDeps(refs);
    head_cols = FormatInactiveHead(node.inactive);
  }
  std::string out = node.id.ToString();
  out += '\t' + node.word;
  out += '\t' + OrUnderscore(node.lemma);
  out += '\t' + OrUnderscore(node.upos);
  out += '\t' + OrUnderscore(node.tag);
  out += '\t' + FormatFeatureList(node.feats);
  out += '\t' + head_cols;
  out += '\t' + deps;
  out += '\t' + FormatFeatureList(node.misc);
  return out;
}

}  // namespace

ConlluError::ConlluError(std::string source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
      line_(line) {}

std::optional<GraphMode> ParseGraphMode(std::string_view name) {
  if (name == "basic") return GraphMode::kBasic;
  if (name == "enhanced") return GraphMode::kEnhanced;
  return std::nullopt;
}

Document ParseDocument(std::string_view text, GraphMode mode, std::string source_name) {
  Document doc;
  doc.source_name = std::move(source_name);
  SentenceBuilder builder(mode, doc.source_name);

  Block block;
  auto flush = [&]() {
    if (block.rows.empty()) return;  // comments carry over to the next block
    doc.sentences.push_back(builder.Build(block));
    block = Block{};
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      block.comments.emplace_back(line);
      continue;
    }
    Row row{line_no, SplitTabs(line)};
    if (row.cols.size() != kColumns) {
      throw ConlluError(doc.source_name, line_no,
                        "expected 10 tab-separated columns, found " +
                            std::to_string(row.cols.size()));
    }
    block.rows.push_back(std::move(row));
  }
  flush();
  doc.trailing_comments = std::move(block.comments);
  return doc;
}

std::string SerializeSentence(const DepGraph& graph, GraphMode mode) {
  // Rows sort by (index, kind, copy): range rows come before the token they
  // start at, empty nodes after it.
  std::map<std::tuple<int, int, int>, std::string> rows;
  for (const MultiwordToken& span : graph.multiword_tokens) {
    rows[{span.first, 0, 0}] = JoinRow(
        std::to_string(span.first) + "-" + std::to_string(span.last), span.columns);
  }
  for (const auto& [id, node] : graph.nodes()) {
    rows[{id.index, 1, id.copy}] = NodeRow(graph, node, mode);
  }
  for (const HiddenRow& row : graph.hidden_rows) {
    std::vector<std::string> cols = row.columns;
    cols.at(kDeps - 1) = FormatInactiveDeps(row.deps);
    rows[{row.id.index, 1, row.id.copy}] = JoinRow(row.id.ToString(), cols);
  }
  std::string out;
  for (const std::string& c : graph.comments) out += c + "\n";
  for (const auto& [key, row] : rows) out += row + "\n";
  out += "\n";
  return out;
}

std::string SerializeDocument(const Document& doc, GraphMode mode) {
  std::string out;
  for (const DepGraph& graph : doc.sentences) out += SerializeSentence(graph, mode);
  for (const std::string& c : doc.trailing_comments) out += c + "\n";
  return out;
}

}  // namespace semgrex
