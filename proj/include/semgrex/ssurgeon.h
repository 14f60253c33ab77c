// Ssurgeon: graph rewriting driven by Semgrex matches.
//
// Rule files hold blank-line separated rules. Each rule is a pattern (one or
// more lines) followed by one directive per line:
//
//   # id: add-conj-subject
//   {word:running}=A >nsubj ({}=B >conj {}=C)
//   addEdge -gov A -dep C -reln nsubj
//
// A blank line between the pattern and its first directive is allowed, and
// an indented line starting with '-' continues the previous directive.

#ifndef SEMGREX_SSURGEON_H_
#define SEMGREX_SSURGEON_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semgrex/conllu.h"
#include "semgrex/graph.h"
#include "semgrex/matcher.h"
#include "semgrex/pattern.h"

namespace semgrex {

class SsurgeonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AddEdge {
  std::string gov;
  std::string dep;
  std::string reln;
};

struct RemoveEdge {
  std::string gov;
  std::string dep;
  std::optional<std::string> reln;
};

struct RemoveNamedEdge {
  std::string edge;
};

struct RelabelNamedEdge {
  std::string edge;
  std::string reln;
};

struct NodePosition {
  enum Kind { kStart, kEnd, kBefore, kAfter };
  Kind kind = kEnd;
  std::string node;  // kBefore / kAfter
};

struct AddNode {
  AttributeMap attrs;
  std::string reln;
  std::string gov;
  NodePosition position;
};

struct RemoveSubgraph {
  std::string node;
};

struct EditNode {
  std::string node;
  AttributeMap assignments;
};

using EditDirective = std::variant<AddEdge, RemoveEdge, RemoveNamedEdge, RelabelNamedEdge,
                                   AddNode, RemoveSubgraph, EditNode>;

std::string_view DirectiveName(const EditDirective& edit);

struct SsurgeonRule {
  std::string id;
  Pattern pattern;
  std::vector<EditDirective> edits;
  int line = 0;  // first line of the rule in its file
};

// Builds a rule from parts, checking every name the edits use against the
// pattern. Throws SsurgeonError.
SsurgeonRule MakeRule(std::string id, Pattern pattern, std::vector<EditDirective> edits);

// Parses one directive line such as "addEdge -gov A -dep C -reln nsubj".
EditDirective ParseDirective(std::string_view line);

std::vector<SsurgeonRule> ParseRuleFile(std::string_view text,
                                        std::string_view source = "<rules>");

// Runs one edit against the match bindings. Node-moving edits update
// `bindings` in place. Returns whether the graph changed.
bool ApplyEdit(DepGraph& graph, Match& bindings, const EditDirective& edit,
               std::string_view rule_id = "");

struct RuleOutcome {
  int iterations = 0;     // searches that led to a change
  int total_changes = 0;  // edits that reported a change
};

struct ApplyOptions {
  // 0 selects the default cap of 10 * (node count + 10).
  std::int64_t iteration_cap = 0;
  // Called after every edit that changed the graph.
  std::function<void(const DepGraph&, const EditDirective&)> after_edit;
};

// Re-searches after every changing match until no match changes anything.
// Throws SsurgeonError when the iteration cap is exceeded.
RuleOutcome ApplyRule(DepGraph& graph, const SsurgeonRule& rule,
                      const ApplyOptions& options = {});

struct SentenceReport {
  std::size_t sentence_index = 0;  // 0-based
  std::vector<std::pair<std::string, int>> changes;  // rule id -> changes
};

struct EditReport {
  std::vector<SentenceReport> sentences;  // only sentences with changes
  int total_changes() const;
};

EditReport ApplyRules(Document& doc, const std::vector<SsurgeonRule>& rules,
                      const ApplyOptions& options = {});

}  // namespace semgrex

#endif  // SEMGREX_SSURGEON_H_
