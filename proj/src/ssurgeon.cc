#include "semgrex/ssurgeon.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace semgrex {

namespace {

// Marks a binding whose node or edge was consumed by an earlier edit.
constexpr NodeId kConsumed{-1, -1};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Whitespace-separated tokens; double quotes group, backslash escapes
// inside quotes.
std::vector<std::string> Tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::string token;
    bool quoted = false;
    while (i < line.size() &&
           (quoted || !std::isspace(static_cast<unsigned char>(line[i])))) {
      char c = line[i++];
      if (c == '"') {
        quoted = !quoted;
      } else if (quoted && c == '\\' && i < line.size()) {
        token += line[i++];
      } else {
        token += c;
      }
    }
    if (quoted) throw SsurgeonError("unterminated quote in directive");
    out.push_back(std::move(token));
  }
  return out;
}

const std::set<std::string, std::less<>> kStructuralFlags = {"gov",  "dep",  "reln",
                                                             "edge", "node", "position"};

struct FlagSet {
  std::map<std::string, std::string, std::less<>> flags;
  AttributeMap attrs;

  std::optional<std::string> Take(std::string_view name) {
    auto it = flags.find(name);
    if (it == flags.end()) return std::nullopt;
    std::string value = std::move(it->second);
    flags.erase(it);
    return value;
  }
  std::string Require(std::string_view directive, std::string_view name) {
    auto value = Take(name);
    if (!value) {
      throw SsurgeonError(std::string(directive) + ": missing required flag -" +
                          std::string(name));
    }
    return *value;
  }
};

FlagSet ParseFlags(std::string_view directive, const std::vector<std::string>& tokens,
                   bool allow_attrs) {
  FlagSet out;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok.size() < 2 || tok[0] != '-') {
      throw SsurgeonError(std::string(directive) + ": unexpected argument '" + tok + "'");
    }
    std::string body = tok.substr(1);
    std::string key, value;
    if (auto eq = body.find('='); eq != std::string::npos) {
      key = body.substr(0, eq);
      value = body.substr(eq + 1);
    } else {
      key = body;
      if (!kStructuralFlags.count(key)) {
        throw SsurgeonError(std::string(directive) + ": unknown flag -" + key);
      }
      if (i + 1 >= tokens.size()) {
        throw SsurgeonError(std::string(directive) + ": flag -" + key + " needs a value");
      }
      value = tokens[++i];
    }
    if (kStructuralFlags.count(key)) {
      if (!out.flags.emplace(key, value).second) {
        throw SsurgeonError(std::string(directive) + ": flag -" + key + " given twice");
      }
    } else if (allow_attrs && !key.empty()) {
      out.attrs[key] = value;
    } else {
      throw SsurgeonError(std::string(directive) + ": unknown flag -" + key);
    }
  }
  return out;
}

void RejectLeftovers(std::string_view directive, const FlagSet& flags) {
  if (!flags.flags.empty()) {
    throw SsurgeonError(std::string(directive) + ": flag -" + flags.flags.begin()->first +
                        " is not valid here");
  }
}

NodePosition ParsePosition(const std::string& text) {
  if (text == "start") return {NodePosition::kStart, ""};
  if (text == "end") return {NodePosition::kEnd, ""};
  if (text.size() > 1 && text[0] == '+') return {NodePosition::kBefore, text.substr(1)};
  if (text.size() > 1 && text[0] == '-') return {NodePosition::kAfter, text.substr(1)};
  throw SsurgeonError("addNode: bad -position '" + text +
                      "' (expected start, end, +NAME or -NAME)");
}

void CheckNodeName(const Pattern& p, const std::string& name, std::string_view directive) {
  if (!p.node_names().count(name)) {
    throw SsurgeonError(std::string(directive) + " refers to node '" + name +
                        "', which the pattern does not name");
  }
}

void CheckEdgeName(const Pattern& p, const std::string& name, std::string_view directive) {
  if (!p.edge_names().count(name)) {
    throw SsurgeonError(std::string(directive) + " refers to edge '" + name +
                        "', which the pattern does not name");
  }
}

class EditRunner {
 public:
  EditRunner(DepGraph& graph, Match& bindings, std::string_view rule_id)
      : graph_(graph), bindings_(bindings), rule_id_(rule_id) {}

  bool Run(const EditDirective& edit) {
    context_ = std::string(DirectiveName(edit));
    try {
      return std::visit([&](const auto& e) { return Apply(e); }, edit);
    } catch (const GraphError& e) {
      Fail(e.what());
    }
  }

 private:
  [[noreturn]] void Fail(const std::string& message) const {
    std::string where = context_;
    if (!rule_id_.empty()) where += " in rule " + std::string(rule_id_);
    throw SsurgeonError(where + ": " + message);
  }

  NodeId Node(const std::string& name) const {
    auto it = bindings_.nodes.find(name);
    if (it == bindings_.nodes.end()) Fail("node '" + name + "' is not bound by this match");
    if (it->second == kConsumed || !graph_.HasNode(it->second)) {
      Fail("node '" + name + "' was removed by an earlier edit");
    }
    return it->second;
  }

  Edge& BoundEdge(const std::string& name) const {
    auto it = bindings_.edges.find(name);
    if (it == bindings_.edges.end()) Fail("edge '" + name + "' is not bound by this match");
    if (it->second.gov == kConsumed || !graph_.HasEdge(it->second)) {
      Fail("edge '" + name + "' was removed by an earlier edit");
    }
    return it->second;
  }

  void Remap(const IdRemap& remap) {
    for (auto& [name, id] : bindings_.nodes) {
      auto it = remap.find(id);
      id = it == remap.end() ? kConsumed : it->second;
    }
    for (auto& [name, edge] : bindings_.edges) {
      auto g = remap.find(edge.gov);
      auto d = remap.find(edge.dep);
      if (g == remap.end() || d == remap.end()) {
        edge = Edge{kConsumed, kConsumed, ""};
      } else {
        edge = Edge{g->second, d->second, edge.relation};
      }
    }
  }

  bool Apply(const AddEdge& e) { return graph_.AddEdge(Node(e.gov), Node(e.dep), e.reln); }

  bool Apply(const RemoveEdge& e) {
    std::optional<std::string_view> reln;
    if (e.reln) reln = *e.reln;
    return graph_.RemoveEdge(Node(e.gov), Node(e.dep), reln) > 0;
  }

  bool Apply(const RemoveNamedEdge& e) {
    Edge& edge = BoundEdge(e.edge);
    graph_.RemoveEdge(edge.gov, edge.dep, edge.relation);
    edge = Edge{kConsumed, kConsumed, ""};
    return true;
  }

  bool Apply(const RelabelNamedEdge& e) {
    Edge& edge = BoundEdge(e.edge);
    if (edge.relation == e.reln) return false;
    graph_.RemoveEdge(edge.gov, edge.dep, edge.relation);
    graph_.AddEdge(edge.gov, edge.dep, e.reln);
    edge.relation = e.reln;
    return true;
  }

  bool Apply(const AddNode& e) {
    NodeId anchor;
    Side side = Side::kBefore;
    switch (e.position.kind) {
      case NodePosition::kStart:
        anchor = graph_.nodes().begin()->first;
        break;
      case NodePosition::kEnd:
        anchor = graph_.nodes().rbegin()->first;
        side = Side::kAfter;
        break;
      case NodePosition::kBefore:
        anchor = Node(e.position.node);
        break;
      case NodePosition::kAfter:
        anchor = Node(e.position.node);
        side = Side::kAfter;
        break;
    }
    (void)Node(e.gov);  // fail before mutating if the governor is gone
    IdRemap remap;
    NodeId added = graph_.InsertNode(e.attrs, anchor, side, &remap);
    Remap(remap);
    graph_.AddEdge(Node(e.gov), added, e.reln);
    return true;
  }

  bool Apply(const RemoveSubgraph& e) {
    IdRemap remap;
    graph_.RemoveSubgraph(Node(e.node), &remap);
    Remap(remap);
    return true;
  }

  bool Apply(const EditNode& e) {
    semgrex::Node& node = graph_.mutable_node(Node(e.node));
    bool changed = false;
    for (const auto& [key, value] : e.assignments) {
      if (key == "idx") Fail("attribute 'idx' cannot be edited");
      auto current = node.Attribute(key);
      bool same = value.empty() ? !current.has_value() : current == value;
      if (same) continue;
      node.SetAttribute(key, value);
      changed = true;
    }
    return changed;
  }

  DepGraph& graph_;
  Match& bindings_;
  std::string_view rule_id_;
  std::string context_;
};

struct PendingRule {
  std::string id;
  int line = 0;
  std::vector<std::pair<int, std::string>> pattern_lines;
  std::vector<std::pair<int, std::string>> directives;

  bool empty() const { return pattern_lines.empty() && directives.empty(); }
};

}  // namespace

std::string_view DirectiveName(const EditDirective& edit) {
  return std::visit(Overloaded{
                        [](const AddEdge&) { return std::string_view("addEdge"); },
                        [](const RemoveEdge&) { return std::string_view("removeEdge"); },
                        [](const RemoveNamedEdge&) {
                          return std::string_view("removeNamedEdge");
                        },
                        [](const RelabelNamedEdge&) {
                          return std::string_view("relabelNamedEdge");
                        },
                        [](const AddNode&) { return std::string_view("addNode"); },
                        [](const RemoveSubgraph&) {
                          return std::string_view("removeSubgraph");
                        },
                        [](const EditNode&) { return std::string_view("editNode"); },
                    },
                    edit);
}

EditDirective ParseDirective(std::string_view line) {
  std::vector<std::string> tokens = Tokenize(line);
  if (tokens.empty()) throw SsurgeonError("empty directive");
  const std::string& name = tokens.front();

  if (name == "addEdge") {
    FlagSet f = ParseFlags(name, tokens, false);
    AddEdge e{f.Require(name, "gov"), f.Require(name, "dep"), f.Require(name, "reln")};
    RejectLeftovers(name, f);
    return e;
  }
  if (name == "removeEdge") {
    FlagSet f = ParseFlags(name, tokens, false);
    RemoveEdge e{f.Require(name, "gov"), f.Require(name, "dep"), f.Take("reln")};
    RejectLeftovers(name, f);
    return e;
  }
  if (name == "removeNamedEdge") {
    FlagSet f = ParseFlags(name, tokens, false);
    RemoveNamedEdge e{f.Require(name, "edge")};
    RejectLeftovers(name, f);
    return e;
  }
  if (name == "relabelNamedEdge") {
    FlagSet f = ParseFlags(name, tokens, false);
    RelabelNamedEdge e{f.Require(name, "edge"), f.Require(name, "reln")};
    RejectLeftovers(name, f);
    return e;
  }
  if (name == "addNode") {
    FlagSet f = ParseFlags(name, tokens, true);
    AddNode e;
    e.reln = f.Require(name, "reln");
    e.gov = f.Require(name, "gov");
    e.position = ParsePosition(f.Require(name, "position"));
    e.attrs = std::move(f.attrs);
    RejectLeftovers(name, f);
    if (!e.attrs.count("word")) throw SsurgeonError("addNode: missing required flag -word");
    if (e.attrs.count("idx")) throw SsurgeonError("addNode: -idx cannot be set");
    return e;
  }
  if (name == "removeSubgraph") {
    FlagSet f = ParseFlags(name, tokens, false);
    RemoveSubgraph e{f.Require(name, "node")};
    RejectLeftovers(name, f);
    return e;
  }
  if (name == "editNode") {
    FlagSet f = ParseFlags(name, tokens, true);
    EditNode e{f.Require(name, "node"), std::move(f.attrs)};
    RejectLeftovers(name, f);
    if (e.assignments.empty()) throw SsurgeonError("editNode: no attributes to set");
    if (e.assignments.count("idx")) throw SsurgeonError("editNode: -idx cannot be set");
    return e;
  }
  throw SsurgeonError("unknown directive '" + name + "'");
}

SsurgeonRule MakeRule(std::string id, Pattern pattern, std::vector<EditDirective> edits) {
  if (edits.empty()) throw SsurgeonError("rule " + id + " has no edits");
  for (const EditDirective& edit : edits) {
    std::string where = std::string(DirectiveName(edit)) + " in rule " + id;
    std::visit(Overloaded{
                   [&](const AddEdge& e) {
                     CheckNodeName(pattern, e.gov, where);
                     CheckNodeName(pattern, e.dep, where);
                   },
                   [&](const RemoveEdge& e) {
                     CheckNodeName(pattern, e.gov, where);
                     CheckNodeName(pattern, e.dep, where);
                   },
                   [&](const RemoveNamedEdge& e) { CheckEdgeName(pattern, e.edge, where); },
                   [&](const RelabelNamedEdge& e) { CheckEdgeName(pattern, e.edge, where); },
                   [&](const AddNode& e) {
                     CheckNodeName(pattern, e.gov, where);
                     if (e.position.kind == NodePosition::kBefore ||
                         e.position.kind == NodePosition::kAfter) {
                       CheckNodeName(pattern, e.position.node, where);
                     }
                     if (!e.attrs.count("word")) {
                       throw SsurgeonError(where + ": attribute 'word' is required");
                     }
                   },
                   [&](const RemoveSubgraph& e) { CheckNodeName(pattern, e.node, where); },
                   [&](const EditNode& e) { CheckNodeName(pattern, e.node, where); },
               },
               edit);
  }
  return SsurgeonRule{std::move(id), std::move(pattern), std::move(edits), 0};
}

std::vector<SsurgeonRule> ParseRuleFile(std::string_view text, std::string_view source) {
  std::vector<SsurgeonRule> rules;
  PendingRule pending;
  std::string src(source);

  auto fail = [&](int line, const std::string& id, const std::string& message) {
    std::string where = src + ":" + std::to_string(line);
    if (!id.empty()) where += " (rule " + id + ")";
    throw SsurgeonError(where + ": " + message);
  };

  auto finish = [&]() {
    if (pending.empty()) return;
    std::string id = pending.id.empty() ? "rule" + std::to_string(rules.size() + 1)
                                        : pending.id;
    if (pending.pattern_lines.empty()) {
      fail(pending.directives.front().first, id, "directive without a pattern");
    }
    if (pending.directives.empty()) fail(pending.line, id, "rule has no directives");
    std::string pattern_text;
    for (const auto& [line, t] : pending.pattern_lines) pattern_text += t + "\n";
    Pattern pattern;
    try {
      pattern = Pattern::Parse(pattern_text);
    } catch (const PatternError& e) {
      fail(pending.pattern_lines.front().first, id, e.what());
    }
    std::vector<EditDirective> edits;
    for (const auto& [line, t] : pending.directives) {
      try {
        edits.push_back(ParseDirective(t));
      } catch (const SsurgeonError& e) {
        fail(line, id, e.what());
      }
    }
    try {
      SsurgeonRule rule = MakeRule(id, std::move(pattern), std::move(edits));
      rule.line = pending.line;
      rules.push_back(std::move(rule));
    } catch (const SsurgeonError& e) {
      fail(pending.line, id, e.what());
    }
    pending = PendingRule{};
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    std::string_view line = Trim(raw);

    if (line.empty()) {
      if (!pending.directives.empty()) finish();
      continue;
    }
    if (line.front() == '#') {
      std::string_view body = Trim(line.substr(1));
      if (body.starts_with("id:")) {
        if (!pending.directives.empty()) finish();
        pending.id = std::string(Trim(body.substr(3)));
        if (pending.line == 0) pending.line = line_no;
      }
      continue;
    }
    if (pending.line == 0) pending.line = line_no;
    bool indented = std::isspace(static_cast<unsigned char>(raw.front()));
    if (indented && line.front() == '-' && !pending.directives.empty()) {
      pending.directives.back().second += " " + std::string(line);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(line.front()))) {
      pending.directives.emplace_back(line_no, std::string(line));
      continue;
    }
    if (!pending.directives.empty()) {
      fail(line_no, pending.id, "pattern text after directives; separate rules with a blank line");
    }
    pending.pattern_lines.emplace_back(line_no, std::string(line));
  }
  finish();
  return rules;
}

bool ApplyEdit(DepGraph& graph, Match& bindings, const EditDirective& edit,
               std::string_view rule_id) {
  return EditRunner(graph, bindings, rule_id).Run(edit);
}

RuleOutcome ApplyRule(DepGraph& graph, const SsurgeonRule& rule, const ApplyOptions& options) {
  const std::int64_t cap = options.iteration_cap > 0
                               ? options.iteration_cap
                               : 10 * (static_cast<std::int64_t>(graph.size()) + 10);
  RuleOutcome outcome;
  while (true) {
    bool changed = false;
    for (const Match& match : FindMatches(graph, rule.pattern)) {
      Match bindings = match;
      int changes = 0;
      for (const EditDirective& edit : rule.edits) {
        if (ApplyEdit(graph, bindings, edit, rule.id)) {
          ++changes;
          if (options.after_edit) options.after_edit(graph, edit);
        }
      }
      if (changes > 0) {
        changed = true;
        ++outcome.iterations;
        outcome.total_changes += changes;
        break;
      }
    }
    if (!changed) return outcome;
    if (outcome.iterations > cap) {
      throw SsurgeonError("rule " + rule.id + " did not converge within " +
                          std::to_string(cap) +
                          " iterations (iteration cap exceeded; does the pattern guard "
                          "against its own edits?)");
    }
  }
}

int EditReport::total_changes() const {
  int total = 0;
  for (const SentenceReport& s : sentences) {
    for (const auto& [id, n] : s.changes) total += n;
  }
  return total;
}

EditReport ApplyRules(Document& doc, const std::vector<SsurgeonRule>& rules,
                      const ApplyOptions& options) {
  EditReport report;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    SentenceReport sentence{i, {}};
    for (const SsurgeonRule& rule : rules) {
      RuleOutcome outcome;
      try {
        outcome = ApplyRule(doc.sentences[i], rule, options);
      } catch (const SsurgeonError& e) {
        throw SsurgeonError("sentence " + std::to_string(i + 1) + ": " + e.what());
      }
      if (outcome.total_changes > 0) sentence.changes.emplace_back(rule.id, outcome.total_changes);
    }
    if (!sentence.changes.empty()) report.sentences.push_back(std::move(sentence));
  }
  return report;
}

}  // namespace semgrex
