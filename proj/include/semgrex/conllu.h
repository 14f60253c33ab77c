// CoNLL-U reading and writing.
//
// Basic mode builds the graph from HEAD/DEPREL and carries DEPS through;
// enhanced mode builds it from DEPS (including empty nodes) and carries
// HEAD/DEPREL through. Either way a parse followed by a write reproduces the
// input rows.

#ifndef SEMGREX_CONLLU_H_
#define SEMGREX_CONLLU_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semgrex/graph.h"

namespace semgrex {

enum class GraphMode { kBasic, kEnhanced };

class ConlluError : public std::runtime_error {
 public:
  ConlluError(std::string source, int line, const std::string& message);

  int line() const { return line_; }

 private:
  int line_;
};

struct Document {
  std::vector<DepGraph> sentences;
  std::string source_name;
  // Comment lines after the last sentence.
  std::vector<std::string> trailing_comments;
};

Document ParseDocument(std::string_view text, GraphMode mode,
                       std::string source_name = "<input>");

// Throws GraphError in basic mode when a node has more than one governor.
std::string SerializeDocument(const Document& doc, GraphMode mode);
std::string SerializeSentence(const DepGraph& graph, GraphMode mode);

std::optional<GraphMode> ParseGraphMode(std::string_view name);

}  // namespace semgrex

#endif  // SEMGREX_CONLLU_H_
