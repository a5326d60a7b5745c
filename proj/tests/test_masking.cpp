#include <gtest/gtest.h>

#include "plan_checks.hpp"
#include "support.hpp"

using namespace umgad;

namespace {

MaskConfig mc(double ratio, std::size_t k = 3, std::size_t neg = 2) {
  MaskConfig c;
  c.mask_ratio = ratio;
  c.repeats = k;
  c.n_neg = neg;
  return c;
}

MultiplexGraph clique_graph(std::size_t q) {
  std::vector<Edge> e;
  for (NodeId a = 0; a < q; ++a)
    for (NodeId b = a + 1; b < q; ++b) e.emplace_back(a, b);
  return fx::make_graph(q, {e}, fx::random_matrix(q, 2, 1));
}

}  // namespace

TEST(MaskedCount, RoundsHalfUp) {
  EXPECT_EQ(masked_count(0.25, 10), 3u);
  EXPECT_EQ(masked_count(0.2, 10), 2u);
  EXPECT_EQ(masked_count(0.04, 10), 0u);
  EXPECT_EQ(masked_count(0.05, 10), 1u);
}

TEST(AttributeMasks, Examples) {
  const auto g = fx::small_graph(10, 1, 2, 1);
  const RngStream rng(1, "t");
  for (const auto& s : plan_attribute_masks(g, mc(0.0), rng)) EXPECT_TRUE(s.empty());
  for (const auto& s : plan_attribute_masks(g, mc(0.5), rng)) {
    EXPECT_EQ(s.size(), 5u);
    EXPECT_EQ(std::set<NodeId>(s.begin(), s.end()).size(), 5u);
  }
  for (auto s : plan_attribute_masks(g, mc(1.0), rng)) {
    std::sort(s.begin(), s.end());
    EXPECT_EQ(s.size(), 10u);
    EXPECT_EQ(s.front(), 0u);
    EXPECT_EQ(s.back(), 9u);
  }
}

TEST(AttributeMasks, ApplyReplacesRows) {
  const Matrix x = fx::random_matrix(3, 3, 2);
  ParamTensor tok("tok", Matrix{{7, 8, 9}});
  Tape t;
  const std::vector<NodeId> none, row2{2}, all{0, 1, 2};
  EXPECT_EQ(apply_attribute_mask(t, x, none, t.param(tok)).value(), x);
  const Matrix m = apply_attribute_mask(t, x, row2, t.param(tok)).value();
  EXPECT_EQ(m(0, 1), x(0, 1));
  EXPECT_EQ(m(1, 2), x(1, 2));
  EXPECT_EQ(m(2, 0), 7.0);
  EXPECT_EQ(m(2, 2), 9.0);
  const Matrix a = apply_attribute_mask(t, x, all, t.param(tok)).value();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a(i, 1), 8.0);
}

TEST(EdgeMasks, Examples) {
  const auto g = fx::make_graph(4, {{{0, 1}, {2, 3}}}, fx::random_matrix(4, 2, 3));
  const RngStream rng(2, "t");
  const auto none = plan_edge_masks(g, mc(0.0), rng);
  for (const auto& m : none[0]) EXPECT_TRUE(m.edges.empty());
  const auto all = plan_edge_masks(g, mc(1.0), rng);
  for (const auto& m : all[0]) {
    EXPECT_EQ(m.edges.size(), 2u);
    EXPECT_EQ(fx::check_edge_mask(g.relations[0], m, 2), "");
    EXPECT_FALSE(m.fallback);
  }
}

TEST(EdgeMasks, StarCenterFallsBack) {
  const auto g = fx::make_graph(4, {{{0, 1}, {0, 2}, {0, 3}}}, fx::random_matrix(4, 2, 4));
  EdgeMask m;
  m.edges = {{0, 1}};
  RngStream s(3, "star");
  sample_negatives(g.relations[0], m, 4, s);
  EXPECT_TRUE(m.fallback);
  for (NodeId c : m.negatives[0]) EXPECT_NE(c, 1u);
}

TEST(Augmentation, TwoNodesSwapEachOther) {
  const auto g = fx::make_graph(2, {{{0, 1}}}, fx::random_matrix(2, 2, 5));
  for (auto swaps : plan_attribute_augmentation(g, mc(1.0), RngStream(4, "t"))) {
    std::sort(swaps.begin(), swaps.end());
    EXPECT_EQ(swaps, (std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 0}}));
  }
  for (const auto& swaps : plan_attribute_augmentation(g, mc(0.0), RngStream(4, "t"))) EXPECT_TRUE(swaps.empty());
}

TEST(Augmentation, SingleNodeRejected) {
  const auto g = fx::make_graph(1, {{}}, Matrix(1, 2, 1.0));
  EXPECT_THROW(plan_attribute_augmentation(g, mc(0.5), RngStream(0, "t")), InsufficientNodes);
}

TEST(Rwr, RestartOneStaysAtSeed) {
  const auto g = fx::small_graph(10, 1, 2, 1);
  RwrConfig rc;
  rc.restart_prob = 1.0;
  RngStream s(5, "rwr");
  EXPECT_EQ(rwr_walk(g.relations[0], 3, rc, s), std::vector<NodeId>{3});
  rc.restart_prob = 0.15;
  rc.subgraph_size = 1;
  EXPECT_EQ(rwr_walk(g.relations[0], 4, rc, s), std::vector<NodeId>{4});
}

TEST(Rwr, CliqueInducedEdges) {
  const auto g = clique_graph(5);
  RwrConfig rc;
  rc.subgraph_size = 4;
  const auto subs = sample_rwr_subgraphs(g, rc, 3, 1, RngStream(6, "t"));
  for (const auto& sg : subs[0]) {
    EXPECT_EQ(sg.nodes.size(), 4u);
    EXPECT_EQ(sg.induced.edges.size(), 6u);
  }
}

TEST(Rwr, EmptyRelationRejected) {
  const auto g = fx::make_graph(4, {{{0, 1}}, {}}, fx::random_matrix(4, 2, 7));
  RwrConfig rc;
  rc.subgraph_size = 2;
  EXPECT_THROW(sample_rwr_subgraphs(g, rc, 2, 1, RngStream(0, "t")), EmptyRelation);
}

TEST(Plans, InvariantsOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SbmConfig sc;
    sc.nodes = 30;
    sc.relations = 2;
    const auto g = make_sbm_multiplex(sc, seed).graph;
    MaskConfig m = mc(0.1 * static_cast<double>(seed % 10), 3, 3);
    RwrConfig rc;
    rc.subgraph_size = 1 + seed % 9;
    const RngStream rng(seed, "plans");
    const auto mask = plan_masks(g, m, substream(rng, "mask"));
    const auto aug = plan_augmentations(g, m, rc, substream(rng, "aug"));
    EXPECT_EQ(fx::check_plans(g, m, rc, mask, aug), "") << "seed " << seed;
  }
}

TEST(Plans, DeterministicAndLabelSensitive) {
  const auto g = fx::small_graph(20, 2, 3, 1);
  const auto a = plan_masks(g, mc(0.3), RngStream(9, "x"));
  const auto b = plan_masks(g, mc(0.3), RngStream(9, "x"));
  const auto c = plan_masks(g, mc(0.3), RngStream(9, "y"));
  EXPECT_EQ(a.masked_nodes, b.masked_nodes);
  EXPECT_NE(a.masked_nodes, c.masked_nodes);
}

TEST(Plans, DumpHasOneLinePerItem) {
  const auto g = fx::small_graph(10, 1, 2, 1);
  const MaskConfig m = mc(0.2, 2, 1);
  RwrConfig rc;
  rc.subgraph_size = 3;
  const auto mask = plan_masks(g, m, RngStream(1, "a"));
  const auto aug = plan_augmentations(g, m, rc, RngStream(1, "b"));
  std::ostringstream os;
  dump_plans(os, mask, aug, "e1");
  std::size_t expected = 0;
  for (const auto& s : mask.masked_nodes) expected += s.size();
  for (const auto& m2 : mask.masked_edges[0]) expected += m2.edges.size();
  for (const auto& s : aug.swaps) expected += s.size();
  const std::string text = os.str();
  const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  EXPECT_GE(lines, expected);
  EXPECT_EQ(text.rfind("e1 ", 0), 0u);
}
