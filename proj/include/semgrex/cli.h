// Command-line front end: `semgrex search` and `semgrex rewrite`.

#ifndef SEMGREX_CLI_H_
#define SEMGREX_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "semgrex/conllu.h"
#include "semgrex/matcher.h"
#include "semgrex/pattern.h"

namespace semgrex {

struct ReportedNode {
  std::string name;  // empty for the anchor
  NodeId id;
  std::string word;
};

struct ReportedEdge {
  std::string name;
  NodeId gov;
  NodeId dep;
  std::string relation;
};

struct ReportedMatch {
  ReportedNode anchor;
  std::vector<ReportedNode> nodes;
  std::vector<ReportedEdge> edges;
};

struct SentenceResult {
  std::size_t sentence_index = 0;  // 1-based across all inputs
  std::string source;
  std::string text;
  // One entry per pattern, in pattern order.
  std::vector<std::vector<ReportedMatch>> per_pattern;

  std::size_t match_count() const;
};

struct MatchReport {
  std::vector<std::string> patterns;
  // Only sentences with at least one match.
  std::vector<SentenceResult> sentences;

  std::size_t total_matches() const;
};

// "# text = ..." when present, otherwise the space-joined words.
std::string SentenceText(const DepGraph& graph);

// Runs every pattern over every sentence. `first_index` numbers the first
// sentence. Work is split over `threads` workers; output order is input
// order regardless.
void CollectMatches(const Document& doc, const std::vector<Pattern>& patterns,
                    std::size_t first_index, int threads, MatchReport& report);

std::string RenderText(const MatchReport& report);
std::string RenderJson(const MatchReport& report);

// Entry point shared by the binary and the tests. Returns the exit code:
// search: 0 = some match, 1 = no match, 2 = error; rewrite: 0 = ok, 2 = error.
int RunCli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
           std::ostream& err);

}  // namespace semgrex

#endif  // SEMGREX_CLI_H_
