// Semgrex pattern language: AST, parser and canonical printer.
//
//   pattern    := node_expr
//   node_expr  := atom constraints
//   atom       := ["!"] "{" [ "$" | attr (";" attr)* ] "}" ["=" NAME]
//               | "(" node_expr ")" ["=" NAME]
//   constraints:= and_expr ("|" and_expr)*
//   and_expr   := term (["&"] term)*
//   term       := "[" constraints "]" | ["!"] OP [label] ["=" NAME] atom
//               | ("==" | "!==") "{" "}" "=" NAME
//
// A relation target is an atom, so unparenthesised chains all hang off the
// same head node.

#ifndef SEMGREX_PATTERN_H_
#define SEMGREX_PATTERN_H_

#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace semgrex {

class PatternError : public std::runtime_error {
 public:
  PatternError(std::size_t offset, std::vector<std::string> expected,
               const std::string& message);

  // Byte offset into the pattern text.
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

enum class RelOp {
  kDependentOf,     // <
  kGovernorOf,      // >
  kDescendantOf,    // <<
  kAncestorOf,      // >>
  kImmediatelyPrecedes,  // .
  kPrecedes,        // ..
  kImmediatelyFollows,   // -
  kFollows,         // --
  kSisterImmediatelyPrecedes,  // $+
  kSisterImmediatelyFollows,   // $-
  kSisterPrecedes,  // $++
  kSisterFollows,   // $--
  kGovernorOfRight,   // >++
  kGovernorOfLeft,    // >--
  kDependentOfRight,  // <++
  kDependentOfLeft,   // <--
};

inline constexpr int kRelOpCount = 16;

std::string_view RelOpSpelling(RelOp op);
std::optional<RelOp> RelOpFromSpelling(std::string_view text);

// Operators whose witness is a single edge between the two nodes, or a chain
// of edges. Only these take labels and edge names.
bool IsEdgeOperator(RelOp op);

// Exact string or whole-string regular expression.
class StringTest {
 public:
  static StringTest Exact(std::string value);
  // Throws std::regex_error if the source does not compile.
  static StringTest Regex(std::string source);

  bool is_regex() const { return regex_ != nullptr; }
  const std::string& text() const { return text_; }
  bool Matches(std::string_view value) const;

  friend bool operator==(const StringTest& a, const StringTest& b) {
    return a.is_regex() == b.is_regex() && a.text_ == b.text_;
  }

 private:
  std::string text_;
  std::shared_ptr<const std::regex> regex_;
};

struct AttrTest {
  std::string key;
  StringTest value;
  friend bool operator==(const AttrTest&, const AttrTest&) = default;
};

struct NodeDesc {
  std::vector<AttrTest> tests;
  bool root_anchor = false;
  bool negated = false;
  std::optional<std::string> name;
  friend bool operator==(const NodeDesc&, const NodeDesc&) = default;
};

struct PatternNode;
struct Constraint;

struct Relation {
  RelOp op = RelOp::kGovernorOf;
  std::optional<StringTest> label;
  std::optional<std::string> edge_name;
  bool negated = false;
  std::shared_ptr<const PatternNode> target;
  friend bool operator==(const Relation& a, const Relation& b);
};

// Compares the enclosing node with a named node.
struct IdentityTest {
  std::string name;
  bool equal = true;
  friend bool operator==(const IdentityTest&, const IdentityTest&) = default;
};

struct AndExpr {
  std::vector<Constraint> terms;
  friend bool operator==(const AndExpr& a, const AndExpr& b);
};

struct OrExpr {
  std::vector<Constraint> branches;
  friend bool operator==(const OrExpr& a, const OrExpr& b);
};

struct Constraint {
  std::variant<Relation, IdentityTest, AndExpr, OrExpr> expr;
  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct PatternNode {
  NodeDesc desc;
  // Conjunction. Each entry is a relation, identity test, or an Or; nested
  // Ands are flattened by the parser.
  std::vector<Constraint> constraints;
  friend bool operator==(const PatternNode&, const PatternNode&) = default;
};

class Pattern {
 public:
  // Parses and validates. Throws PatternError.
  static Pattern Parse(std::string_view text);
  // Validates a hand-built tree (also used by Parse).
  static Pattern FromTree(PatternNode root);

  const PatternNode& root() const { return *root_; }
  const std::set<std::string>& node_names() const { return node_names_; }
  const std::set<std::string>& edge_names() const { return edge_names_; }

  // Canonical text: single spaces between tokens, parentheses around every
  // relation target that has constraints of its own.
  std::string ToString() const;

  friend bool operator==(const Pattern& a, const Pattern& b) {
    return *a.root_ == *b.root_;
  }

 private:
  std::shared_ptr<const PatternNode> root_;
  std::set<std::string> node_names_;
  std::set<std::string> edge_names_;
};

std::string PrintPatternNode(const PatternNode& node);

}  // namespace semgrex

#endif  // SEMGREX_PATTERN_H_
