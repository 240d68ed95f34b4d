#include <gtest/gtest.h>

#include "nlc/beat_topology.hpp"

using namespace nlc::beat;

TEST(BeatTree, LevelsAndParents) {
  const auto t = build_tree(4);
  EXPECT_EQ(t.size(), 15);
  EXPECT_EQ(t.root(), 8);
  EXPECT_EQ(t.nodes_at(0), (std::vector<std::int64_t>{8}));
  EXPECT_EQ(t.nodes_at(1), (std::vector<std::int64_t>{4, 12}));
  EXPECT_EQ(t.nodes_at(3).size(), 8u);
  EXPECT_EQ(t.parent[5], 6);
  EXPECT_EQ(t.parent[6], 4);
  EXPECT_EQ(t.parent[4], 8);
  EXPECT_EQ(t.edges().size(), 14u);
  EXPECT_THROW(build_tree(1), std::invalid_argument);
}

TEST(BeatTree, DegreeBounded) {
  const auto t = build_tree(8);
  const auto g = beat_graph(t, false);
  for (int v = 0; v < g.size(); ++v) EXPECT_LE(g.degree(v, kTree), 3);
  const auto c = beat_graph(t, true);
  for (int v = 0; v < c.size(); ++v) EXPECT_LE(c.degree(v, kTree | kChain), 5);
}

TEST(BeatTree, TernaryGeneralization) {
  const auto t = build_tree(3, 3);
  EXPECT_EQ(t.size(), 26);
  EXPECT_EQ(t.edges().size(), 25u);
}

TEST(Address, WorkedExamples) {
  const std::int64_t n = 16;
  const auto a = address_of(9, n), b = address_of(13, n);
  EXPECT_EQ(a.bits, "0100");
  EXPECT_EQ(b.bits, "0110");
  const auto c = lca(a, b);
  EXPECT_EQ(c.bits, "01");
  EXPECT_EQ(position_of(c, n), 12);
  EXPECT_EQ(position_of(a, n), 9);
  EXPECT_EQ(tree_distance(a, b), 4);
  EXPECT_EQ(tree_route(9, 13, n), (std::vector<std::int64_t>{9, 10, 12, 14, 13}));
  EXPECT_THROW(address_of(0, n), std::out_of_range);
  EXPECT_THROW(address_of(16, n), std::out_of_range);
}

TEST(Address, RoundTripAllPositions) {
  const std::int64_t n = 1 << 9;
  for (std::int64_t p = 1; p < n; ++p) EXPECT_EQ(position_of(address_of(p, n), n), p);
}

TEST(Address, TreeDistanceMatchesBfs) {
  const int L = 6;
  const std::int64_t n = 1 << L;
  const auto g = beat_graph(build_tree(L), false);
  long bad = 0;
  for (std::int64_t p = 1; p < n; ++p) {
    const auto d = g.bfs(static_cast<int>(p - 1));
    for (std::int64_t q = 1; q < n; ++q)
      if (d[q - 1] != tree_distance(address_of(p, n), address_of(q, n))) ++bad;
  }
  EXPECT_EQ(bad, 0);
}

TEST(Distances, MaxDistanceAtDepthTen) {
  const auto s = distance_stats(beat_graph(build_tree(10), true));
  EXPECT_FALSE(s.sampled);
  EXPECT_EQ(s.max_distance, 18);
  EXPECT_EQ(s.pairs, 1023ull * 1022 / 2);
  EXPECT_EQ(s.disconnected_pairs, 0u);
}

TEST(Distances, ChainMeanIsLinear) {
  // Mean pairwise distance on a path of n vertices is (n + 1) / 3.
  for (int n : {7, 31, 255}) EXPECT_NEAR(distance_stats(chain_graph(n)).mean_distance, (n + 1) / 3.0, 1e-12);
}

TEST(Distances, BeatMeanOverLogBounded) {
  double worst = 0.0;
  for (int L = 4; L <= 12; ++L) {
    const auto s = distance_stats(beat_graph(build_tree(L), true), 2);
    worst = std::max(worst, s.mean_distance / L);
  }
  EXPECT_LT(worst, 2.0);
}

TEST(Distances, ThreadCountDoesNotChangeResult) {
  const auto g = beat_graph(build_tree(7), true);
  const auto a = distance_stats(g, 1), b = distance_stats(g, 3);
  EXPECT_EQ(a.histogram, b.histogram);
  EXPECT_EQ(a.mean_distance, b.mean_distance);
}

TEST(Routing, LcaPathOnTreeAndBfsOtherwise) {
  const auto tree = beat_graph(build_tree(5), false);
  const auto p = route(tree.find(0, 9), tree.find(0, 13), tree);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->size(), 5u);
  const auto combined = beat_graph(build_tree(5), true);
  const auto q = route(combined.find(0, 9), combined.find(0, 13), combined);
  ASSERT_TRUE(q);
  EXPECT_LE(q->size(), p->size());
  for (std::size_t i = 0; i + 1 < q->size(); ++i) EXPECT_TRUE(combined.has_edge((*q)[i], (*q)[i + 1]));
}

TEST(Routing, DeadNodesRerouteOrDisconnect) {
  const auto g = beat_graph(build_tree(4), false);
  const int root = g.find(0, 8);
  const auto cut = remove_nodes(g, {root});
  EXPECT_FALSE(cut.alive(root));
  EXPECT_FALSE(route(cut.find(0, 1), cut.find(0, 15), cut));
  EXPECT_GT(distance_stats(cut).disconnected_pairs, 0u);
  const auto full = beat_graph(build_tree(4), true);
  EXPECT_FALSE(route(full.find(0, 1), full.find(0, 15), remove_nodes(full, {full.find(0, 8)})));
  const auto leaves = remove_nodes(g, {g.find(0, 6)});
  EXPECT_FALSE(route(leaves.find(0, 5), leaves.find(0, 7), leaves));
  const auto alt = remove_nodes(full, {full.find(0, 6)});
  EXPECT_TRUE(route(alt.find(0, 5), alt.find(0, 7), alt));
}

TEST(Grid, ColumnTreeConnectsRows) {
  const auto g = build_grid(3, 3);
  EXPECT_EQ(g.size(), 21);
  const int a = g.find(0, 1), b = g.find(2, 1);
  ASSERT_GE(a, 0);
  ASSERT_GE(b, 0);
  const auto p = route(a, b, g);
  ASSERT_TRUE(p);
  bool column = false;
  for (const auto& [e, k] : g.edges()) column = column || (k & kGridColumn);
  EXPECT_TRUE(column);
}

TEST(Export, DotRoundTrip) {
  const auto g = build_grid(2, 3);
  const std::string dot = to_dot(g);
  const auto back = from_dot(dot);
  EXPECT_EQ(to_dot(back), dot);
  EXPECT_EQ(back.edges(), g.edges());
  EXPECT_EQ(to_json(back), to_json(g));
  EXPECT_THROW(from_dot("graph { 0 -- 1 [kind=\"warp\"]; }"), std::invalid_argument);
}

TEST(Export, KindNames) {
  EXPECT_EQ(kind_name(kChain | kTree), "chain+tree");
  EXPECT_EQ(kind_from_name("chain+tree"), kChain | kTree);
  EXPECT_THROW(kind_from_name("bogus"), std::invalid_argument);
}
