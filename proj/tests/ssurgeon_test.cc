#include "semgrex/ssurgeon.h"

#include <gtest/gtest.h>

#include <random>

#include "test_util.h"

namespace semgrex {
namespace {

using testing::EdgeStrings;
using testing::Id;
using testing::ParseOne;

SsurgeonRule OneRule(std::string_view text) {
  std::vector<SsurgeonRule> rules = ParseRuleFile(text);
  EXPECT_EQ(rules.size(), 1u);
  return rules.at(0);
}

TEST(DirectiveTest, ParsesEachKind) {
  EXPECT_EQ(DirectiveName(ParseDirective("addEdge -gov A -dep C -reln nsubj")), "addEdge");
  auto add = std::get<AddEdge>(ParseDirective("addEdge -gov A -dep C -reln nsubj"));
  EXPECT_EQ(add.gov, "A");
  EXPECT_EQ(add.dep, "C");
  EXPECT_EQ(add.reln, "nsubj");

  auto rm = std::get<RemoveEdge>(ParseDirective("removeEdge -gov B -dep C"));
  EXPECT_FALSE(rm.reln);
  EXPECT_EQ(std::get<RemoveNamedEdge>(ParseDirective("removeNamedEdge -edge e")).edge, "e");
  auto relabel = std::get<RelabelNamedEdge>(ParseDirective("relabelNamedEdge -edge e -reln dep"));
  EXPECT_EQ(relabel.reln, "dep");

  auto node = std::get<AddNode>(ParseDirective("addNode -word=a -lemma=a -reln det -gov A "
                                               "-position +A"));
  EXPECT_EQ(node.attrs.at("word"), "a");
  EXPECT_EQ(node.attrs.at("lemma"), "a");
  EXPECT_EQ(node.position.kind, NodePosition::kBefore);
  EXPECT_EQ(node.position.node, "A");
  EXPECT_EQ(std::get<AddNode>(ParseDirective("addNode -word=x -reln d -gov A -position -A"))
                .position.kind,
            NodePosition::kAfter);
  EXPECT_EQ(std::get<AddNode>(ParseDirective("addNode -word=x -reln d -gov A -position start"))
                .position.kind,
            NodePosition::kStart);
  EXPECT_EQ(std::get<AddNode>(ParseDirective("addNode -word=x -reln d -gov A -position end"))
                .position.kind,
            NodePosition::kEnd);

  EXPECT_EQ(std::get<RemoveSubgraph>(ParseDirective("removeSubgraph -node X")).node, "X");
  auto edit = std::get<EditNode>(ParseDirective("editNode -node X -lemma=run -tag=VB"));
  EXPECT_EQ(edit.assignments.at("lemma"), "run");
  EXPECT_EQ(edit.assignments.at("tag"), "VB");
}

TEST(DirectiveTest, Rejects) {
  EXPECT_THROW(ParseDirective("frobnicate -node X"), SsurgeonError);
  EXPECT_THROW(ParseDirective("addEdge -gov A -dep C"), SsurgeonError);
  EXPECT_THROW(ParseDirective("removeNamedEdge"), SsurgeonError);
  EXPECT_THROW(ParseDirective("addNode -word=x -reln d -gov A -position ^"), SsurgeonError);
  EXPECT_THROW(ParseDirective("addEdge -gov A -dep C -reln nsubj -bogus x"), SsurgeonError);
}

TEST(RuleFileTest, NamesMustBeBound) {
  EXPECT_THROW(ParseRuleFile("{}=A >nsubj {}=B\naddEdge -gov A -dep Z -reln x\n"),
               SsurgeonError);
  EXPECT_THROW(ParseRuleFile("{}=A >nsubj {}=B\nremoveNamedEdge -edge e\n"), SsurgeonError);
  // A node name is not an edge name.
  EXPECT_THROW(ParseRuleFile("{}=A >nsubj {}=B\nremoveNamedEdge -edge A\n"), SsurgeonError);
  EXPECT_THROW(ParseRuleFile("{}=A >nsubj=e {}=B\nremoveSubgraph -node e\n"), SsurgeonError);
  EXPECT_NO_THROW(ParseRuleFile("{}=A >nsubj=e {}=B\nremoveNamedEdge -edge e\n"));
}

TEST(RuleFileTest, BadPatternReportsLine) {
  try {
    ParseRuleFile("# id: one\n{}=A > {}=B\naddEdge -gov A -dep B -reln x\n\n{}=A >\n"
                  "removeSubgraph -node A\n");
    FAIL();
  } catch (const SsurgeonError& e) {
    EXPECT_NE(std::string(e.what()).find(":5"), std::string::npos) << e.what();
  }
}

TEST(RuleFileTest, IdsAndDefaults) {
  std::vector<SsurgeonRule> rules = ParseRuleFile(
      "# id: first\n{}=A >x {}=B\nremoveEdge -gov A -dep B\n\n"
      "# plain comment\n{}=A >y {}=B\nremoveEdge -gov A -dep B\n");
  ASSERT_EQ(rules.size(), 2u);
  EXPECT_EQ(rules[0].id, "first");
  EXPECT_FALSE(rules[1].id.empty());
  EXPECT_NE(rules[0].id, rules[1].id);
  EXPECT_TRUE(ParseRuleFile("").empty());
  EXPECT_TRUE(ParseRuleFile("# only a comment\n\n").empty());
}

TEST(ApplyRuleTest, AddEdgeAndFixpoint) {
  DepGraph g = ParseOne(testing::kPaulAndMary);
  SsurgeonRule rule = OneRule(
      "{word:running}=A >nsubj ({}=B >conj {}=C)\naddEdge -gov A -dep C -reln nsubj\n");
  RuleOutcome out = ApplyRule(g, rule);
  EXPECT_EQ(out.iterations, 1);
  EXPECT_EQ(out.total_changes, 1);
  EXPECT_TRUE(g.HasEdge({Id(g, "running"), Id(g, "Mary"), "nsubj"}));
  // Running again changes nothing.
  DepGraph before = g;
  EXPECT_EQ(ApplyRule(g, rule).total_changes, 0);
  EXPECT_EQ(g, before);
}

TEST(ApplyRuleTest, EditNode) {
  DepGraph g = ParseOne(testing::kJenRescuedBeckett);
  SsurgeonRule rule = OneRule("{word:rescued}=V\neditNode -node V -lemma=save -ner=O\n");
  EXPECT_EQ(ApplyRule(g, rule).total_changes, 1);
  EXPECT_EQ(g.node(NodeId(2)).lemma, "save");
  EXPECT_EQ(g.node(NodeId(2)).ner(), "O");
}

TEST(ApplyRuleTest, RemoveSubgraph) {
  DepGraph g = ParseOne(testing::kGuerrillas);
  SsurgeonRule rule = OneRule("{word:surgeon}=S\nremoveSubgraph -node S\n");
  EXPECT_EQ(ApplyRule(g, rule).total_changes, 1);
  EXPECT_EQ(g.Text(), "guerrillas kidnapped");
  EXPECT_EQ(EdgeStrings(g), (std::set<std::string>{"nsubj(kidnapped, guerrillas)"}));
  EXPECT_TRUE(g.CheckInvariants().empty());
}

TEST(ApplyRuleTest, AddNodePositions) {
  for (auto [position, text] : std::vector<std::pair<std::string, std::string>>{
           {"+A", "I bought a hamburger"},
           {"-A", "I bought hamburger a"},
           {"start", "a I bought hamburger"},
           {"end", "I bought hamburger a"}}) {
    DepGraph g = ParseOne(testing::kIBoughtHamburger);
    SsurgeonRule rule = OneRule("{word:bought} >obj ({}=A !>det {})\n"
                                "addNode -word=a -reln det -gov A -position " +
                                position + "\n");
    EXPECT_EQ(ApplyRule(g, rule).iterations, 1) << position;
    EXPECT_EQ(g.Text(), text) << position;
    EXPECT_TRUE(g.HasEdge({Id(g, "hamburger"), Id(g, "a"), "det"})) << position;
    EXPECT_TRUE(g.CheckInvariants().empty()) << position;
  }
}

TEST(ApplyRuleTest, UnguardedRuleHitsCap) {
  DepGraph g = ParseOne(testing::kIBoughtHamburger);
  SsurgeonRule rule = OneRule("{word:bought} >obj {}=A\naddNode -word=a -reln det -gov A -position end\n");
  try {
    ApplyRule(g, rule);
    FAIL();
  } catch (const SsurgeonError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration cap"), std::string::npos);
  }
  DepGraph h = ParseOne(testing::kIBoughtHamburger);
  ApplyOptions small;
  small.iteration_cap = 3;
  EXPECT_THROW(ApplyRule(h, rule, small), SsurgeonError);
  EXPECT_LE(h.size(), 3u + 4u);
}

TEST(ApplyRuleTest, RelabelKeepsNodesAndEdgeCount) {
  DepGraph g = ParseOne(testing::kGuerrillas);
  std::size_t edges = g.edges().size();
  std::vector<NodeId> nodes = g.CanonicalOrder();
  SsurgeonRule rule = OneRule("{} >amod=e {}\nrelabelNamedEdge -edge e -reln nmod\n");
  EXPECT_EQ(ApplyRule(g, rule).total_changes, 1);
  EXPECT_EQ(g.edges().size(), edges);
  EXPECT_EQ(g.CanonicalOrder(), nodes);
  EXPECT_TRUE(g.HasEdge({NodeId(5), NodeId(4), "nmod"}));
}

TEST(ApplyRuleTest, RelabelOntoExistingEdgeMerges) {
  // Relabelling onto a label already present on the same pair would
  // duplicate the edge; the graph keeps one.
  DepGraph g = ParseOne(testing::kGuerrillas);
  g.AddEdge(NodeId(5), NodeId(4), "nmod");
  SsurgeonRule rule = OneRule("{} >amod=e {}\nrelabelNamedEdge -edge e -reln nmod\n");
  ApplyRule(g, rule);
  EXPECT_EQ(g.edges().size(), 4u);
  EXPECT_TRUE(g.CheckInvariants().empty());
}

TEST(ApplyRulesTest, EmptyRuleListIsIdentity) {
  Document doc = ParseDocument(std::string(testing::kGuerrillas) + testing::kPaulAndMary,
                               GraphMode::kBasic);
  Document copy = doc;
  EditReport report = ApplyRules(doc, {});
  EXPECT_EQ(report.total_changes(), 0);
  EXPECT_TRUE(report.sentences.empty());
  EXPECT_EQ(doc.sentences, copy.sentences);
}

TEST(ApplyRulesTest, RuleOrderMatters) {
  const char add[] = "# id: add\n{word:running}=A >nsubj ({}=B >conj {}=C)\n"
                     "addEdge -gov A -dep C -reln nsubj\n";
  const char drop[] = "# id: drop\n{}=B >conj {}=C\nremoveEdge -gov B -dep C -reln conj\n";
  Document a = ParseDocument(testing::kPaulAndMary, GraphMode::kBasic);
  Document b = a;
  EditReport ra = ApplyRules(a, ParseRuleFile(std::string(add) + "\n" + drop));
  EditReport rb = ApplyRules(b, ParseRuleFile(std::string(drop) + "\n" + add));
  EXPECT_TRUE(a.sentences[0].HasEdge({NodeId(5), NodeId(3), "nsubj"}));
  EXPECT_FALSE(b.sentences[0].HasEdge({NodeId(5), NodeId(3), "nsubj"}));
  EXPECT_EQ(ra.total_changes(), 2);
  EXPECT_EQ(rb.total_changes(), 1);
  ASSERT_EQ(ra.sentences.size(), 1u);
  EXPECT_EQ(ra.sentences[0].sentence_index, 0u);
  EXPECT_EQ(ra.sentences[0].changes,
            (std::vector<std::pair<std::string, int>>{{"add", 1}, {"drop", 1}}));
}

// addNode then removeSubgraph on the new node gives back the graph.
TEST(ApplyRuleTest, AddThenRemoveRestores) {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    DepGraph g = testing::RandomGraph(rng, 8, 10);
    if (g.size() == 0) continue;
    DepGraph before = g;
    std::vector<NodeId> order = g.CanonicalOrder();
    NodeId anchor = order[rng() % order.size()];
    Match m{anchor, {{"A", anchor}}, {}, {anchor}};
    const char* pos[] = {"+A", "-A", "start", "end"};
    ASSERT_TRUE(ApplyEdit(g, m,
                          ParseDirective(std::string("addNode -word=NEW -reln tmp -gov A "
                                                     "-position ") +
                                         pos[trial % 4])));
    EXPECT_TRUE(g.CheckInvariants().empty());
    NodeId added = Id(g, "NEW");
    Match m2{added, {{"N", added}}, {}, {added}};
    ASSERT_TRUE(ApplyEdit(g, m2, ParseDirective("removeSubgraph -node N")));
    EXPECT_EQ(g, before);
  }
}

TEST(ApplyRuleTest, InvariantsHoldAfterEveryEdit) {
  std::mt19937 rng(67);
  std::vector<SsurgeonRule> rules = ParseRuleFile(
      "{}=A >nsubj {}=B\nremoveEdge -gov A -dep B -reln nsubj\n\n"
      "{}=A >obj=e {}=B\nrelabelNamedEdge -edge e -reln conj\n\n"
      "{tag:N}=A !>det {}\naddNode -word=d -reln det -gov A -position +A\n\n"
      "{word:c}=A\nremoveSubgraph -node A\n\n"
      "{}=A >det {}=B\naddEdge -gov A -dep B -reln dep\n");
  int edits = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Document doc;
    doc.sentences.push_back(testing::RandomGraph(rng, 8, 10));
    ApplyOptions options;
    options.after_edit = [&](const DepGraph& g, const EditDirective& e) {
      ++edits;
      EXPECT_TRUE(g.CheckInvariants().empty()) << DirectiveName(e) << ": " << (g.CheckInvariants().empty() ? "" : g.CheckInvariants()[0]);
    };
    try {
      ApplyRules(doc, rules, options);
    } catch (const SsurgeonError&) {
      // Only the per-edit invariants matter here.
    }
  }
  EXPECT_GT(edits, 100);
}

}  // namespace
}  // namespace semgrex
