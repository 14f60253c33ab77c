#include "semgrex/graph.h"

#include <gtest/gtest.h>

#include <random>

#include "test_util.h"

namespace semgrex {
namespace {

using testing::EdgeStrings;
using testing::Id;
using testing::ParseOne;

Node Word(NodeId id, std::string word) {
  Node n;
  n.id = id;
  n.word = std::move(word);
  return n;
}

// gov -> dep pairs over tokens 1..n, first token declared root.
DepGraph Chain(int n, const std::vector<std::pair<int, int>>& edges) {
  DepGraph g;
  for (int i = 1; i <= n; ++i) g.AddNode(Word(NodeId(i), "w" + std::to_string(i)));
  g.DeclareRoot(NodeId(1));
  for (auto [gov, dep] : edges) g.AddEdge(NodeId(gov), NodeId(dep), "dep");
  return g;
}

TEST(NodeIdTest, OrdersByIndexThenCopy) {
  EXPECT_LT(NodeId(2), NodeId(2, 1));
  EXPECT_LT(NodeId(2, 1), NodeId(2, 2));
  EXPECT_LT(NodeId(2, 9), NodeId(3));
  EXPECT_EQ(NodeId(4).ToString(), "4");
  EXPECT_EQ(NodeId(4, 2).ToString(), "4.2");
}

TEST(NodeIdTest, ParseRoundTrips) {
  for (const char* s : {"1", "12", "3.1", "0.1"}) {
    auto id = NodeId::Parse(s);
    ASSERT_TRUE(id) << s;
    EXPECT_EQ(id->ToString(), s);
  }
  EXPECT_FALSE(NodeId::Parse(""));
  EXPECT_FALSE(NodeId::Parse("x"));
  EXPECT_FALSE(NodeId::Parse("1-2"));
  EXPECT_FALSE(NodeId::Parse("2.0"));
  // HEAD columns use "0", so Parse takes it; node rows reject it later.
  EXPECT_EQ(NodeId::Parse("0"), NodeId(0));
}

TEST(NodeIdTest, StrictTotalOrder) {
  std::vector<NodeId> ids;
  for (int i = 0; i < 4; ++i) {
    for (int c = 0; c < 3; ++c) ids.emplace_back(i, c);
  }
  for (NodeId a : ids) {
    for (NodeId b : ids) {
      int holds = (a < b) + (a == b) + (a > b);
      EXPECT_EQ(holds, 1) << a.ToString() << " " << b.ToString();
    }
  }
}

TEST(FeatureListTest, ParsesAndFormats) {
  FeatureList f = ParseFeatureList("Case=Nom|Number=Sing");
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].key, "Case");
  EXPECT_EQ(f[0].value, "Nom");
  EXPECT_EQ(FormatFeatureList(f), "Case=Nom|Number=Sing");
  EXPECT_TRUE(ParseFeatureList("_").empty());
  EXPECT_EQ(FormatFeatureList({}), "_");
  // Items without '=' survive unchanged.
  EXPECT_EQ(FormatFeatureList(ParseFeatureList("SpaceAfter=No|Odd")), "SpaceAfter=No|Odd");
}

TEST(NodeTest, AttributeLookup) {
  Node n = Word(NodeId(3, 1), "dogs");
  n.lemma = "dog";
  n.tag = "NNS";
  n.upos = "NOUN";
  n.feats = ParseFeatureList("Number=Plur");
  n.misc = ParseFeatureList("ner=ANIMAL|Gloss=x");
  EXPECT_EQ(n.Attribute("word"), "dogs");
  EXPECT_EQ(n.Attribute("lemma"), "dog");
  EXPECT_EQ(n.Attribute("pos"), "NNS");
  EXPECT_EQ(n.Attribute("tag"), "NNS");
  EXPECT_EQ(n.Attribute("upos"), "NOUN");
  EXPECT_EQ(n.Attribute("idx"), "3.1");
  EXPECT_EQ(n.Attribute("ner"), "ANIMAL");
  EXPECT_EQ(n.Attribute("Number"), "Plur");
  EXPECT_EQ(n.Attribute("Gloss"), "x");
  EXPECT_FALSE(n.Attribute("missing"));

  Node bare = Word(NodeId(1), "x");
  EXPECT_FALSE(bare.Attribute("lemma"));
  EXPECT_FALSE(bare.Attribute("ner"));
  EXPECT_EQ(bare.Attribute("idx"), "1");
}

TEST(NodeTest, SetAttribute) {
  Node n = Word(NodeId(1), "x");
  n.SetAttribute("lemma", "y");
  n.SetAttribute("ner", "PERSON");
  n.SetAttribute("custom", "1");
  EXPECT_EQ(n.lemma, "y");
  EXPECT_EQ(n.ner(), "PERSON");
  EXPECT_EQ(n.Attribute("custom"), "1");
  n.SetAttribute("lemma", "");
  n.SetAttribute("custom", "");
  EXPECT_FALSE(n.lemma);
  EXPECT_FALSE(n.Attribute("custom"));
  EXPECT_THROW(n.SetAttribute("idx", "2"), GraphError);
}

TEST(DepGraphTest, AddEdgeOnPaulAndMary) {
  DepGraph g = ParseOne(testing::kPaulAndMary);
  NodeId running = Id(g, "running"), mary = Id(g, "Mary");
  EXPECT_TRUE(g.AddEdge(running, mary, "nsubj"));
  EXPECT_TRUE(g.HasEdge({running, mary, "nsubj"}));
  auto before = g.edges();
  EXPECT_FALSE(g.AddEdge(running, mary, "nsubj"));
  EXPECT_EQ(g.edges(), before);
  EXPECT_THROW(g.AddEdge(running, running, "dep"), GraphError);
  EXPECT_THROW(g.AddEdge(running, NodeId(9), "dep"), GraphError);
  EXPECT_THROW(g.AddEdge(running, mary, ""), GraphError);
}

TEST(DepGraphTest, AddEdgeUpdatesRoots) {
  DepGraph g = Chain(3, {{1, 2}});
  EXPECT_EQ(g.roots(), (std::set<NodeId>{NodeId(1), NodeId(3)}));
  g.AddEdge(NodeId(2), NodeId(3), "dep");
  EXPECT_EQ(g.roots(), (std::set<NodeId>{NodeId(1)}));
  // A declared root keeps its status but is reported.
  g.AddEdge(NodeId(3), NodeId(1), "dep");
  EXPECT_TRUE(g.IsRoot(NodeId(1)));
  EXPECT_EQ(g.Warnings().size(), 1u);
}

TEST(DepGraphTest, RemoveEdge) {
  DepGraph g = ParseOne(testing::kPaulAndMary);
  auto before = EdgeStrings(g);
  EXPECT_EQ(g.RemoveEdge(Id(g, "Paul"), Id(g, "Mary"), "conj"), 1);
  auto after = EdgeStrings(g);
  before.erase("conj(Paul, Mary)");
  EXPECT_EQ(after, before);
  EXPECT_EQ(g.RemoveEdge(Id(g, "Paul"), Id(g, "Mary"), "conj"), 0);
  EXPECT_EQ(EdgeStrings(g), after);
  EXPECT_THROW(g.RemoveEdge(NodeId(1), NodeId(42)), GraphError);

  DepGraph two = Chain(2, {});
  two.AddEdge(NodeId(1), NodeId(2), "dep");
  two.AddEdge(NodeId(1), NodeId(2), "nsubj");
  EXPECT_EQ(two.edges().size(), 2u);
  EXPECT_EQ(two.RemoveEdge(NodeId(1), NodeId(2)), 2);
  EXPECT_TRUE(two.edges().empty());
}

TEST(DepGraphTest, InsertNodeBeforeHamburger) {
  DepGraph g = ParseOne(testing::kIBoughtHamburger);
  IdRemap remap;
  NodeId a = g.InsertNode({{"word", "a"}}, NodeId(3), Side::kBefore, &remap);
  EXPECT_EQ(a, NodeId(3));
  EXPECT_EQ(g.Text(), "I bought a hamburger");
  EXPECT_EQ(remap.at(NodeId(3)), NodeId(4));
  EXPECT_TRUE(g.HasEdge({NodeId(2), NodeId(4), "obj"}));
  EXPECT_TRUE(g.CheckInvariants().empty());
}

TEST(DepGraphTest, InsertNodeAtEndKeepsIndices) {
  DepGraph g = ParseOne(testing::kIBoughtHamburger);
  auto edges = g.edges();
  NodeId added = g.InsertNode({{"word", "."}}, NodeId(3), Side::kAfter);
  EXPECT_EQ(added, NodeId(4));
  EXPECT_EQ(g.edges(), edges);
}

TEST(DepGraphTest, InsertNodeAtStartShiftsEverything) {
  DepGraph g = ParseOne(testing::kIBoughtHamburger);
  std::set<Edge> shifted;
  for (const Edge& e : g.edges()) {
    shifted.insert({NodeId(e.gov.index + 1), NodeId(e.dep.index + 1), e.relation});
  }
  g.InsertNode({{"word", "So"}}, NodeId(1), Side::kBefore);
  EXPECT_EQ(g.edges(), shifted);
  EXPECT_EQ(g.Text(), "So I bought hamburger");
  EXPECT_EQ(g.declared_roots().count(NodeId(3)), 1u);
}

TEST(DepGraphTest, InsertNodeRemapsCopiesAndSpans) {
  DepGraph g;
  for (int i = 1; i <= 3; ++i) g.AddNode(Word(NodeId(i), "w" + std::to_string(i)));
  g.AddNode(Word(NodeId(2, 1), "copy"));
  g.DeclareRoot(NodeId(1));
  g.AddEdge(NodeId(1), NodeId(2), "dep");
  g.AddEdge(NodeId(1), NodeId(2, 1), "conj");
  g.AddEdge(NodeId(2, 1), NodeId(3), "obj");
  g.multiword_tokens.push_back({2, 3, {"w23", "_", "_", "_", "_", "_", "_", "_", "_"}});

  g.InsertNode({{"word", "new"}}, NodeId(1), Side::kAfter);
  EXPECT_TRUE(g.HasNode(NodeId(3, 1)));
  EXPECT_TRUE(g.HasEdge({NodeId(1), NodeId(3, 1), "conj"}));
  EXPECT_TRUE(g.HasEdge({NodeId(3, 1), NodeId(4), "obj"}));
  ASSERT_EQ(g.multiword_tokens.size(), 1u);
  EXPECT_EQ(g.multiword_tokens[0].first, 3);
  EXPECT_EQ(g.multiword_tokens[0].last, 4);

  // "after" an ordinary token goes past its copy nodes.
  NodeId after = g.InsertNode({{"word", "x"}}, NodeId(3), Side::kAfter);
  EXPECT_EQ(after, NodeId(4));
  EXPECT_EQ(g.node(NodeId(3, 1)).word, "copy");
  EXPECT_TRUE(g.CheckInvariants().empty());
}

TEST(DepGraphTest, InsertNodeRequiresWordAndAnchor) {
  DepGraph g = ParseOne(testing::kIBoughtHamburger);
  EXPECT_THROW(g.InsertNode({{"lemma", "a"}}, NodeId(1), Side::kBefore), GraphError);
  EXPECT_THROW(g.InsertNode({{"word", "a"}}, NodeId(7), Side::kBefore), GraphError);
}

TEST(DepGraphTest, RemoveSubgraphSurgeon) {
  DepGraph g = ParseOne(testing::kGuerrillas);
  auto removed = g.RemoveSubgraph(NodeId(5));
  EXPECT_EQ(removed, (std::set<NodeId>{NodeId(3), NodeId(4), NodeId(5)}));
  EXPECT_EQ(g.Text(), "guerrillas kidnapped");
  EXPECT_EQ(EdgeStrings(g), (std::set<std::string>{"nsubj(kidnapped, guerrillas)"}));
}

TEST(DepGraphTest, RemoveSubgraphLeafAndDiamond) {
  DepGraph leaf = ParseOne(testing::kGuerrillas);
  EXPECT_EQ(leaf.RemoveSubgraph(NodeId(1)), (std::set<NodeId>{NodeId(1)}));
  EXPECT_EQ(leaf.size(), 4u);
  EXPECT_EQ(leaf.node(NodeId(1)).word, "kidnapped");

  // 1 -> 2 -> 4, 1 -> 3 -> 4: removing 2 keeps 4, which 3 still reaches.
  DepGraph diamond = Chain(4, {{1, 2}, {1, 3}, {2, 4}, {3, 4}});
  EXPECT_EQ(diamond.RemoveSubgraph(NodeId(2)), (std::set<NodeId>{NodeId(2)}));
  EXPECT_EQ(diamond.Text(), "w1 w3 w4");
  EXPECT_TRUE(diamond.HasEdge({NodeId(2), NodeId(3), "dep"}));
}

TEST(DepGraphTest, RemoveSubgraphOfOnlyRootEmptiesGraph) {
  DepGraph g = ParseOne(testing::kJenRescuedBeckett);
  g.RemoveSubgraph(NodeId(2));
  EXPECT_TRUE(g.empty());
  EXPECT_TRUE(g.edges().empty());
}

TEST(DepGraphTest, InsertThenRemoveRestores) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    DepGraph g = testing::RandomGraph(rng, 8, 10);
    DepGraph before = g;
    std::vector<NodeId> ids;
    for (const auto& [id, n] : g.nodes()) {
      if (!id.is_copy()) ids.push_back(id);
    }
    if (ids.empty()) continue;
    NodeId anchor = ids[trial % ids.size()];
    Side side = trial % 2 ? Side::kBefore : Side::kAfter;
    NodeId added = g.InsertNode({{"word", "tmp"}}, anchor, side);
    ASSERT_TRUE(g.CheckInvariants().empty());
    g.RemoveSubgraph(added);
    // Declared roots survive by id, so the graphs compare equal.
    EXPECT_EQ(g.nodes(), before.nodes()) << trial;
    EXPECT_EQ(g.edges(), before.edges()) << trial;
    EXPECT_EQ(g.declared_roots(), before.declared_roots()) << trial;
  }
}

TEST(DepGraphTest, CanonicalOrder) {
  DepGraph jen = ParseOne(testing::kJenRescuedBeckett);
  EXPECT_EQ(jen.CanonicalOrder(), (std::vector<NodeId>{NodeId(2), NodeId(1), NodeId(3)}));
  DepGraph cycle = Chain(3, {{1, 2}, {2, 3}, {3, 1}});
  EXPECT_EQ(cycle.CanonicalOrder(), (std::vector<NodeId>{NodeId(1), NodeId(2), NodeId(3)}));
  EXPECT_TRUE(DepGraph().CanonicalOrder().empty());
}

// Kahn's algorithm with the smallest available id first, written out
// independently of the graph module.
std::vector<NodeId> KahnOracle(const DepGraph& g) {
  std::map<NodeId, int> indegree;
  for (const auto& [id, n] : g.nodes()) indegree[id] = 0;
  for (const Edge& e : g.edges()) ++indegree[e.dep];
  std::vector<NodeId> out;
  std::set<NodeId> done;
  while (out.size() < g.size()) {
    std::optional<NodeId> next;
    for (const auto& [id, d] : indegree) {
      if (d == 0 && !done.count(id)) {
        next = id;
        break;
      }
    }
    if (!next) {
      out.clear();
      for (const auto& [id, n] : g.nodes()) out.push_back(id);
      return out;
    }
    done.insert(*next);
    out.push_back(*next);
    for (const Edge& e : g.edges()) {
      if (e.gov == *next) --indegree[e.dep];
    }
  }
  return out;
}

TEST(DepGraphTest, CanonicalOrderMatchesKahnOracle) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    DepGraph g = testing::RandomGraph(rng, 8, 10);
    std::vector<NodeId> order = g.CanonicalOrder();
    EXPECT_EQ(order, KahnOracle(g));
    std::map<NodeId, std::size_t> at;
    for (std::size_t i = 0; i < order.size(); ++i) at[order[i]] = i;
    bool acyclic = true;
    for (const NodeId id : order) acyclic &= !g.Descendants(id).count(id);
    if (!acyclic) continue;
    for (const Edge& e : g.edges()) EXPECT_LT(at[e.gov], at[e.dep]);
  }
}

TEST(DepGraphTest, DescendantsOfKidnapped) {
  DepGraph g = ParseOne(testing::kGuerrillas);
  EXPECT_EQ(g.Descendants(NodeId(2)),
            (std::set<NodeId>{NodeId(1), NodeId(3), NodeId(4), NodeId(5)}));
  EXPECT_TRUE(g.Descendants(NodeId(1)).empty());
  EXPECT_EQ(g.Ancestors(NodeId(3)), (std::set<NodeId>{NodeId(2), NodeId(5)}));
  EXPECT_THROW(g.Descendants(NodeId(9)), GraphError);
}

// Reachability by repeated boolean matrix squaring.
TEST(DepGraphTest, ClosuresMatchMatrixOracle) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    DepGraph g = testing::RandomGraph(rng, 8, 10);
    std::vector<NodeId> ids;
    for (const auto& [id, n] : g.nodes()) ids.push_back(id);
    std::size_t n = ids.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    auto pos = [&](NodeId id) {
      return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (const Edge& e : g.edges()) r[pos(e.gov)][pos(e.dep)] = true;
    for (int round = 0; round < 4; ++round) {
      auto next = r;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
          if (!r[i][k]) continue;
          for (std::size_t j = 0; j < n; ++j) {
            if (r[k][j]) next[i][j] = true;
          }
        }
      }
      r = next;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::set<NodeId> down, up;
      for (std::size_t j = 0; j < n; ++j) {
        if (r[i][j]) down.insert(ids[j]);
        if (r[j][i]) up.insert(ids[j]);
      }
      EXPECT_EQ(g.Descendants(ids[i]), down);
      EXPECT_EQ(g.Ancestors(ids[i]), up);
    }
  }
}

TEST(DepGraphTest, InvariantsHoldUnderRandomMutation) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    DepGraph g = testing::RandomGraph(rng, 8, 10);
    for (int step = 0; step < 6 && !g.empty(); ++step) {
      std::vector<NodeId> ids;
      for (const auto& [id, n] : g.nodes()) ids.push_back(id);
      NodeId a = ids[rng() % ids.size()], b = ids[rng() % ids.size()];
      switch (rng() % 4) {
        case 0:
          if (a != b) g.AddEdge(a, b, "dep");
          break;
        case 1:
          g.RemoveEdge(a, b);
          break;
        case 2:
          if (!a.is_copy()) g.InsertNode({{"word", "n"}}, a, rng() % 2 ? Side::kBefore : Side::kAfter);
          break;
        default:
          g.RemoveSubgraph(a);
          break;
      }
      ASSERT_TRUE(g.CheckInvariants().empty()) << trial << ":" << step;
    }
  }
}

TEST(DepGraphTest, AddEdgeIsIdempotent) {
  DepGraph once = Chain(3, {});
  once.AddEdge(NodeId(1), NodeId(2), "x");
  DepGraph twice = Chain(3, {});
  twice.AddEdge(NodeId(1), NodeId(2), "x");
  twice.AddEdge(NodeId(1), NodeId(2), "x");
  EXPECT_EQ(once.edges(), twice.edges());
}

TEST(DepGraphTest, CheckInvariantsFindsGaps) {
  DepGraph g;
  g.AddNode(Word(NodeId(1), "a"));
  g.AddNode(Word(NodeId(3), "b"));
  g.DeclareRoot(NodeId(1));
  EXPECT_FALSE(g.CheckInvariants().empty());
  EXPECT_THROW(g.AddNode(Word(NodeId(1), "dup")), GraphError);
}

}  // namespace
}  // namespace semgrex
