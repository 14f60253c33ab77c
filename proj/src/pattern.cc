#include "semgrex/pattern.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <utility>

namespace semgrex {

namespace {

struct OpSpelling {
  std::string_view text;
  RelOp op;
};

// Longest spellings first so that lexing takes the longest match.
constexpr std::array<OpSpelling, kRelOpCount> kOpSpellings{{
    {"<++", RelOp::kDependentOfRight},
    {"<--", RelOp::kDependentOfLeft},
    {">++", RelOp::kGovernorOfRight},
    {">--", RelOp::kGovernorOfLeft},
    {"$++", RelOp::kSisterPrecedes},
    {"$--", RelOp::kSisterFollows},
    {"<<", RelOp::kDescendantOf},
    {">>", RelOp::kAncestorOf},
    {"..", RelOp::kPrecedes},
    {"--", RelOp::kFollows},
    {"$+", RelOp::kSisterImmediatelyPrecedes},
    {"$-", RelOp::kSisterImmediatelyFollows},
    {"<", RelOp::kDependentOf},
    {">", RelOp::kGovernorOf},
    {".", RelOp::kImmediatelyPrecedes},
    {"-", RelOp::kImmediatelyFollows},
}};

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Bare relation labels: letters, digits, non-ASCII bytes, and _ : - . @
// after the first character.
bool IsLabelStart(char c) {
  return IsNameChar(c) || static_cast<unsigned char>(c) >= 0x80;
}
bool IsLabelChar(char c) {
  return IsLabelStart(c) || c == ':' || c == '-' || c == '.' || c == '@';
}

bool IsSpace(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string EscapeBareValue(const std::string& value) {
  std::string out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    char c = value[i];
    bool edge_space = IsSpace(c) && (i == 0 || i + 1 == value.size());
    if (c == ';' || c == '}' || c == '\\' || (i == 0 && c == '/') || edge_space) {
      out += '\\';
    }
    out += c;
  }
  return out;
}

std::string EscapeRegexBody(const std::string& body) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '\\' && i + 1 < body.size()) {
      out += body[i];
      out += body[++i];
    } else if (body[i] == '/') {
      out += "\\/";
    } else {
      out += body[i];
    }
  }
  return out;
}

std::string PrintStringTest(const StringTest& t) {
  if (t.is_regex()) return "/" + EscapeRegexBody(t.text()) + "/";
  return EscapeBareValue(t.text());
}

std::string PrintAtom(const PatternNode& node) {
  const NodeDesc& d = node.desc;
  std::string out = d.negated ? "!{" : "{";
  if (d.root_anchor) {
    out += '$';
  } else {
    for (std::size_t i = 0; i < d.tests.size(); ++i) {
      if (i) out += ';';
      out += d.tests[i].key + ":" + PrintStringTest(d.tests[i].value);
    }
  }
  out += '}';
  if (d.name) out += "=" + *d.name;
  return out;
}

std::string PrintConstraint(const Constraint& c);

// Nested conjunctions print inline; the parser flattens them anyway.
std::string PrintConjunction(const std::vector<Constraint>& terms) {
  std::string out;
  for (const Constraint& t : terms) {
    std::string part;
    if (const auto* conj = std::get_if<AndExpr>(&t.expr)) {
      part = PrintConjunction(conj->terms);
    } else {
      part = PrintConstraint(t);
    }
    if (part.empty()) continue;
    if (!out.empty()) out += ' ';
    out += part;
  }
  return out;
}

std::string PrintConstraint(const Constraint& c) {
  if (const auto* rel = std::get_if<Relation>(&c.expr)) {
    std::string out = rel->negated ? "!" : "";
    out += RelOpSpelling(rel->op);
    if (rel->label) out += PrintStringTest(*rel->label);
    if (rel->edge_name) out += "=" + *rel->edge_name;
    out += ' ';
    if (rel->target->constraints.empty()) {
      out += PrintAtom(*rel->target);
    } else {
      out += "(" + PrintPatternNode(*rel->target) + ")";
    }
    return out;
  }
  if (const auto* id = std::get_if<IdentityTest>(&c.expr)) {
    return std::string(id->equal ? "==" : "!==") + " {}=" + id->name;
  }
  if (const auto* conj = std::get_if<AndExpr>(&c.expr)) {
    return "[" + PrintConjunction(conj->terms) + "]";
  }
  const auto& disj = std::get<OrExpr>(c.expr);
  std::string out = "[";
  for (std::size_t i = 0; i < disj.branches.size(); ++i) {
    if (i) out += " | ";
    const Constraint& b = disj.branches[i];
    if (const auto* conj = std::get_if<AndExpr>(&b.expr)) {
      out += PrintConjunction(conj->terms);
    } else {
      out += PrintConstraint(b);
    }
  }
  return out + "]";
}

// Offsets of name occurrences, used to point validation errors at text.
using OffsetTable = std::map<std::string, std::size_t>;

class Validator {
 public:
  explicit Validator(const OffsetTable* offsets) : offsets_(offsets) {}

  void Run(const PatternNode& root) {
    Walk(root, /*negated=*/false, /*in_or=*/false);
    for (const std::string& name : node_names_) {
      if (edge_names_.count(name)) {
        Fail(name, "name '" + name + "' is used for both a node and an edge");
      }
    }
    for (const std::string& name : identity_refs_) {
      if (!always_bound_.count(name)) {
        Fail(name, node_names_.count(name)
                       ? "identity test refers to '" + name +
                             "', which is only bound inside a disjunction"
                       : "identity test refers to undeclared name '" + name + "'");
      }
    }
  }

  std::set<std::string> node_names_;
  std::set<std::string> edge_names_;

 private:
  [[noreturn]] void Fail(const std::string& name, const std::string& message) const {
    std::size_t offset = 0;
    if (offsets_ != nullptr) {
      auto it = offsets_->find(name);
      if (it != offsets_->end()) offset = it->second;
    }
    throw PatternError(offset, {}, message);
  }

  void Walk(const PatternNode& node, bool negated, bool in_or) {
    const NodeDesc& d = node.desc;
    if (d.root_anchor && !d.tests.empty()) {
      throw PatternError(0, {}, "{$} cannot carry attribute tests");
    }
    if (d.name) {
      if (d.negated) Fail(*d.name, "a negated node cannot be named");
      if (negated) Fail(*d.name, "name '" + *d.name + "' is bound under negation");
      node_names_.insert(*d.name);
      if (!in_or) always_bound_.insert(*d.name);
    }
    for (const Constraint& c : node.constraints) WalkConstraint(c, negated, in_or);
  }

  void WalkConstraint(const Constraint& c, bool negated, bool in_or) {
    if (const auto* rel = std::get_if<Relation>(&c.expr)) {
      if (!rel->target) throw PatternError(0, {}, "relation without target");
      if (!IsEdgeOperator(rel->op) && rel->label) {
        throw PatternError(0, {}, "operator " + std::string(RelOpSpelling(rel->op)) +
                                      " does not take a label");
      }
      if (rel->edge_name) {
        if (!IsEdgeOperator(rel->op)) {
          Fail(*rel->edge_name, "operator " + std::string(RelOpSpelling(rel->op)) +
                                    " cannot name an edge");
        }
        if (negated || rel->negated) {
          Fail(*rel->edge_name,
               "edge name '" + *rel->edge_name + "' is bound under negation");
        }
        edge_names_.insert(*rel->edge_name);
      }
      Walk(*rel->target, negated || rel->negated, in_or);
    } else if (const auto* id = std::get_if<IdentityTest>(&c.expr)) {
      if (negated) Fail(id->name, "identity test under negation");
      identity_refs_.insert(id->name);
    } else if (const auto* conj = std::get_if<AndExpr>(&c.expr)) {
      for (const Constraint& t : conj->terms) WalkConstraint(t, negated, in_or);
    } else {
      for (const Constraint& b : std::get<OrExpr>(c.expr).branches) {
        WalkConstraint(b, negated, true);
      }
    }
  }

  const OffsetTable* offsets_;
  std::set<std::string> always_bound_;
  std::set<std::string> identity_refs_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PatternNode ParsePattern() {
    SkipSpace();
    if (AtEnd()) Fail({"{", "(", "!"}, "empty pattern");
    PatternNode node = ParseNodeExpr(false);
    SkipSpace();
    if (!AtEnd()) {
      Fail({"relation operator", "[", "|", "&", "end of pattern"},
           std::string("unexpected '") + Peek() + "'");
    }
    return node;
  }

  const OffsetTable& offsets() const { return offsets_; }

 private:
  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  bool LookingAt(std::string_view s) const { return text_.substr(pos_).starts_with(s); }
  void SkipSpace() {
    while (!AtEnd() && IsSpace(text_[pos_])) ++pos_;
  }

  [[noreturn]] void Fail(std::vector<std::string> expected, const std::string& message,
                         std::optional<std::size_t> at = std::nullopt) const {
    throw PatternError(at.value_or(pos_), std::move(expected), message);
  }

  void Expect(char c) {
    SkipSpace();
    if (Peek() != c) {
      Fail({std::string(1, c)}, AtEnd() ? "unexpected end of pattern"
                                        : std::string("unexpected '") + Peek() + "'");
    }
    ++pos_;
  }

  std::string ParseName() {
    SkipSpace();
    std::size_t start = pos_;
    while (!AtEnd() && IsNameChar(Peek())) ++pos_;
    if (start == pos_) Fail({"name"}, "expected a name after '='");
    std::string name(text_.substr(start, pos_ - start));
    offsets_.emplace(name, start);
    return name;
  }

  // "=NAME" but not the "==" identity operator.
  std::optional<std::string> ParseOptionalName(bool negated_context) {
    SkipSpace();
    if (Peek() != '=' || Peek(1) == '=') return std::nullopt;
    std::size_t at = pos_;
    ++pos_;
    std::string name = ParseName();
    if (negated_context) {
      Fail({}, "name '" + name + "' is bound under negation", at);
    }
    return name;
  }

  PatternNode ParseNodeExpr(bool negated_context) {
    PatternNode node = ParseAtom(negated_context);
    std::vector<Constraint> more = ParseConstraints(negated_context);
    for (Constraint& c : more) node.constraints.push_back(std::move(c));
    return node;
  }

  PatternNode ParseAtom(bool negated_context) {
    SkipSpace();
    std::size_t start = pos_;
    if (Peek() == '(') {
      ++pos_;
      PatternNode inner = ParseNodeExpr(negated_context);
      Expect(')');
      if (auto name = ParseOptionalName(negated_context)) {
        if (inner.desc.negated) Fail({}, "a negated node cannot be named", start);
        if (inner.desc.name && *inner.desc.name != *name) {
          Fail({}, "node is named twice", start);
        }
        inner.desc.name = std::move(name);
      }
      return inner;
    }
    PatternNode node;
    if (Peek() == '!') {
      ++pos_;
      SkipSpace();
      if (Peek() != '{') Fail({"{"}, "'!' must be followed by a node description");
      node.desc.negated = true;
    }
    if (Peek() != '{') {
      Fail({"{", "(", "!"}, AtEnd() ? "unexpected end of pattern"
                                    : std::string("unexpected '") + Peek() + "'");
    }
    ++pos_;
    ParseDescBody(node.desc);
    if (auto name = ParseOptionalName(negated_context)) {
      if (node.desc.negated) Fail({}, "a negated node cannot be named", start);
      node.desc.name = std::move(name);
    }
    return node;
  }

  void ParseDescBody(NodeDesc& desc) {
    SkipSpace();
    if (Peek() == '}') {
      ++pos_;
      return;
    }
    if (Peek() == '$') {
      ++pos_;
      desc.root_anchor = true;
      Expect('}');
      return;
    }
    while (true) {
      SkipSpace();
      std::size_t key_start = pos_;
      while (!AtEnd() && IsNameChar(Peek())) ++pos_;
      if (key_start == pos_) Fail({"attribute name", "}", "$"}, "expected an attribute");
      std::string key(text_.substr(key_start, pos_ - key_start));
      Expect(':');
      SkipSpace();
      desc.tests.push_back({std::move(key), ParseValue()});
      SkipSpace();
      if (Peek() == ';') {
        ++pos_;
        continue;
      }
      if (Peek() == '}') {
        ++pos_;
        return;
      }
      Fail({";", "}"}, AtEnd() ? "unterminated node description"
                               : std::string("unexpected '") + Peek() + "'");
    }
  }

  std::string ParseRegexBody() {
    std::size_t start = pos_;
    ++pos_;  // opening slash
    std::string body;
    while (true) {
      if (AtEnd()) Fail({"/"}, "unterminated regular expression", start);
      char c = text_[pos_++];
      if (c == '/') return body;
      if (c == '\\' && !AtEnd()) {
        char next = text_[pos_++];
        if (next != '/') body += '\\';
        body += next;
        continue;
      }
      body += c;
    }
  }

  StringTest CompileRegex(std::string body, std::size_t at) const {
    try {
      return StringTest::Regex(std::move(body));
    } catch (const std::regex_error& e) {
      Fail({}, std::string("invalid regular expression: ") + e.what(), at);
    }
  }

  StringTest ParseValue() {
    std::size_t start = pos_;
    if (Peek() == '/') return CompileRegex(ParseRegexBody(), start);
    std::string value;
    std::size_t keep = 0;  // length up to the last escaped or non-space char
    while (!AtEnd() && Peek() != ';' && Peek() != '}') {
      char c = text_[pos_++];
      if (c == '\\' && !AtEnd()) {
        value += text_[pos_++];
        keep = value.size();
        continue;
      }
      value += c;
      if (!IsSpace(c)) keep = value.size();
    }
    value.resize(keep);
    if (value.empty()) Fail({"value"}, "empty attribute value", start);
    return StringTest::Exact(std::move(value));
  }

  bool AtTermStart() const {
    char c = Peek();
    if (c == '[') return true;
    if (c == '=' && Peek(1) == '=') return true;
    if (c == '!') return LookingAt("!==") || MatchOperatorAt(pos_ + 1).has_value();
    return MatchOperatorAt(pos_).has_value();
  }

  std::optional<OpSpelling> MatchOperatorAt(std::size_t at) const {
    std::string_view rest = text_.substr(std::min(at, text_.size()));
    for (const OpSpelling& s : kOpSpellings) {
      if (rest.starts_with(s.text)) return s;
    }
    return std::nullopt;
  }

  // Conjunction list; a top-level "|" produces a single OrExpr entry.
  std::vector<Constraint> ParseConstraints(bool negated_context) {
    std::vector<std::vector<Constraint>> branches;
    branches.push_back(ParseConjunction(negated_context));
    SkipSpace();
    while (Peek() == '|') {
      if (branches.back().empty()) Fail({"relation"}, "empty alternative before '|'");
      ++pos_;
      branches.push_back(ParseConjunction(negated_context));
      if (branches.back().empty()) Fail({"relation"}, "empty alternative after '|'");
      SkipSpace();
    }
    if (branches.size() == 1) return std::move(branches.front());
    OrExpr disj;
    for (auto& terms : branches) disj.branches.push_back(Wrap(std::move(terms)));
    return {Constraint{std::move(disj)}};
  }

  static Constraint Wrap(std::vector<Constraint> terms) {
    if (terms.size() == 1) return std::move(terms.front());
    return Constraint{AndExpr{std::move(terms)}};
  }

  std::vector<Constraint> ParseConjunction(bool negated_context) {
    std::vector<Constraint> terms;
    while (true) {
      SkipSpace();
      if (Peek() == '&') {
        if (terms.empty()) Fail({"relation"}, "'&' without a left operand");
        ++pos_;
        SkipSpace();
        if (!AtTermStart()) Fail({"relation", "["}, "expected a relation after '&'");
      } else if (!AtTermStart()) {
        return terms;
      }
      Constraint term = ParseTerm(negated_context);
      if (auto* conj = std::get_if<AndExpr>(&term.expr)) {
        for (Constraint& t : conj->terms) terms.push_back(std::move(t));
      } else {
        terms.push_back(std::move(term));
      }
    }
  }

  Constraint ParseTerm(bool negated_context) {
    std::size_t start = pos_;
    if (Peek() == '[') {
      ++pos_;
      std::vector<Constraint> inner = ParseConstraints(negated_context);
      if (inner.empty()) Fail({"relation"}, "empty brackets");
      Expect(']');
      return Wrap(std::move(inner));
    }
    if (LookingAt("==") || LookingAt("!==")) {
      bool equal = Peek() == '=';
      pos_ += equal ? 2 : 3;
      if (negated_context) Fail({}, "identity test under negation", start);
      SkipSpace();
      std::size_t target_at = pos_;
      PatternNode target = ParseAtom(false);
      if (!target.desc.name || !target.desc.tests.empty() || target.desc.root_anchor ||
          target.desc.negated || !target.constraints.empty()) {
        Fail({"{}=NAME"}, "identity test needs a named backreference {}=NAME",
             target_at);
      }
      return Constraint{IdentityTest{*target.desc.name, equal}};
    }

    Relation rel;
    if (Peek() == '!') {
      rel.negated = true;
      ++pos_;
    }
    auto op = MatchOperatorAt(pos_);
    if (!op) Fail({"relation operator"}, "expected a relation operator");
    pos_ += op->text.size();
    rel.op = op->op;

    SkipSpace();
    std::size_t label_at = pos_;
    if (Peek() == '/') {
      rel.label = CompileRegex(ParseRegexBody(), label_at);
    } else if (IsLabelStart(Peek())) {
      while (!AtEnd() && IsLabelChar(Peek())) ++pos_;
      rel.label = StringTest::Exact(std::string(text_.substr(label_at, pos_ - label_at)));
    }
    if (rel.label && !IsEdgeOperator(rel.op)) {
      Fail({"{", "(", "!"},
           "operator " + std::string(op->text) + " does not take a label", label_at);
    }
    SkipSpace();
    if (Peek() == '=' && Peek(1) != '=') {
      std::size_t name_at = pos_;
      ++pos_;
      rel.edge_name = ParseName();
      if (!IsEdgeOperator(rel.op)) {
        Fail({}, "operator " + std::string(op->text) + " cannot name an edge", name_at);
      }
      if (negated_context || rel.negated) {
        Fail({}, "edge name '" + *rel.edge_name + "' is bound under negation", name_at);
      }
    }
    rel.target = std::make_shared<const PatternNode>(
        ParseAtom(negated_context || rel.negated));
    return Constraint{std::move(rel)};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  OffsetTable offsets_;
};

}  // namespace

PatternError::PatternError(std::size_t offset, std::vector<std::string> expected,
                           const std::string& message)
    : std::runtime_error([&] {
        std::string m = "pattern error at offset " + std::to_string(offset) + ": " + message;
        if (!expected.empty()) {
          m += " (expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) m += ", ";
            m += "'" + expected[i] + "'";
          }
          m += ")";
        }
        return m;
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

std::string_view RelOpSpelling(RelOp op) {
  for (const OpSpelling& s : kOpSpellings) {
    if (s.op == op) return s.text;
  }
  return "?";
}

std::optional<RelOp> RelOpFromSpelling(std::string_view text) {
  for (const OpSpelling& s : kOpSpellings) {
    if (s.text == text) return s.op;
  }
  return std::nullopt;
}

bool IsEdgeOperator(RelOp op) {
  switch (op) {
    case RelOp::kDependentOf:
    case RelOp::kGovernorOf:
    case RelOp::kDescendantOf:
    case RelOp::kAncestorOf:
    case RelOp::kGovernorOfRight:
    case RelOp::kGovernorOfLeft:
    case RelOp::kDependentOfRight:
    case RelOp::kDependentOfLeft:
      return true;
    default:
      return false;
  }
}

StringTest StringTest::Exact(std::string value) {
  StringTest t;
  t.text_ = std::move(value);
  return t;
}

StringTest StringTest::Regex(std::string source) {
  StringTest t;
  t.regex_ = std::make_shared<const std::regex>(source, std::regex::ECMAScript);
  t.text_ = std::move(source);
  return t;
}

bool StringTest::Matches(std::string_view value) const {
  if (!regex_) return value == text_;
  return std::regex_match(value.begin(), value.end(), *regex_);
}

bool operator==(const Relation& a, const Relation& b) {
  if (a.op != b.op || a.label != b.label || a.edge_name != b.edge_name ||
      a.negated != b.negated) {
    return false;
  }
  if (!a.target || !b.target) return a.target == b.target;
  return *a.target == *b.target;
}

bool operator==(const AndExpr& a, const AndExpr& b) { return a.terms == b.terms; }
bool operator==(const OrExpr& a, const OrExpr& b) { return a.branches == b.branches; }

Pattern Pattern::Parse(std::string_view text) {
  Parser parser(text);
  PatternNode root = parser.ParsePattern();
  Validator validator(&parser.offsets());
  validator.Run(root);
  Pattern p;
  p.node_names_ = std::move(validator.node_names_);
  p.edge_names_ = std::move(validator.edge_names_);
  p.root_ = std::make_shared<const PatternNode>(std::move(root));
  return p;
}

Pattern Pattern::FromTree(PatternNode root) {
  Validator validator(nullptr);
  validator.Run(root);
  Pattern p;
  p.node_names_ = std::move(validator.node_names_);
  p.edge_names_ = std::move(validator.edge_names_);
  p.root_ = std::make_shared<const PatternNode>(std::move(root));
  return p;
}

std::string PrintPatternNode(const PatternNode& node) {
  std::string out = PrintAtom(node);
  std::string rest = PrintConjunction(node.constraints);
  if (!rest.empty()) out += " " + rest;
  return out;
}

std::string Pattern::ToString() const { return PrintPatternNode(*root_); }

}  // namespace semgrex
