#include <gtest/gtest.h>

#include "robonet/error.hpp"
#include "robonet/netgraph.hpp"

using namespace robonet;

TEST(NeighborSets, DirectedCycle) {
  CommGraph g = CommGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}, false);
  auto ns = neighbor_sets(g, 1);
  EXPECT_EQ(ns.in, std::vector<int>{0});
  EXPECT_EQ(ns.out, std::vector<int>{2});
}

TEST(NeighborSets, EmptyGraph) {
  CommGraph g(4);
  for (int i = 0; i < 4; ++i) {
    auto ns = neighbor_sets(g, i);
    EXPECT_TRUE(ns.in.empty());
    EXPECT_TRUE(ns.out.empty());
  }
}

TEST(NeighborSets, CompleteGraph) {
  auto ns = neighbor_sets(CommGraph::complete(4), 2);
  EXPECT_EQ(ns.in, (std::vector<int>{0, 1, 3}));
  EXPECT_EQ(ns.out, ns.in);
}

TEST(NeighborSets, OutOfRange) {
  CommGraph g(3);
  EXPECT_THROW(neighbor_sets(g, 3), InvalidAgentError);
  EXPECT_THROW(neighbor_sets(g, -1), InvalidAgentError);
}

TEST(NeighborSets, UndirectedInEqualsOut) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CommGraph g = erdos_renyi(8, 0.4, seed);
    for (int i = 0; i < 8; ++i) {
      auto ns = neighbor_sets(g, i);
      EXPECT_EQ(ns.in, ns.out);
    }
  }
}

TEST(CommGraph, RejectsSelfLoop) {
  EXPECT_ANY_THROW(CommGraph::from_matrix({{1, 0}, {0, 0}}));
  CommGraph g(2);
  EXPECT_ANY_THROW(g.add_edge(1, 1));
}

TEST(CommGraph, RejectsRaggedMatrix) {
  EXPECT_ANY_THROW(CommGraph::from_matrix({{0, 1}, {1}}));
}

TEST(ErdosRenyi, Extremes) {
  EXPECT_EQ(erdos_renyi(5, 0.0, 3).edge_count(), 0u);
  EXPECT_EQ(erdos_renyi(5, 1.0, 3), CommGraph::complete(5));
}

TEST(ErdosRenyi, Deterministic) {
  EXPECT_EQ(erdos_renyi(4, 0.2, 7).matrix(), erdos_renyi(4, 0.2, 7).matrix());
}

TEST(ErdosRenyi, BadProbability) {
  EXPECT_THROW(erdos_renyi(4, -0.1, 0), InvalidParameterError);
  EXPECT_THROW(erdos_renyi(4, 1.5, 0), InvalidParameterError);
}

TEST(ErdosRenyi, ConnectedFlag) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CommGraph g = erdos_renyi(4, 0.2, seed, true);
    EXPECT_TRUE(is_connected(g));
    EXPECT_TRUE(g.is_symmetric());
  }
}

TEST(ErdosRenyi, GivesUpOnHopelessConnectivity) {
  EXPECT_ANY_THROW(erdos_renyi(6, 0.0, 1, true));
}

TEST(ErdosRenyi, EdgeFrequencyMatchesProbability) {
  const int n = 20;
  const double pairs = n * (n - 1) / 2.0;
  for (double p : {0.1, 0.2, 0.5}) {
    double edges = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) edges += erdos_renyi(n, p, seed).edge_count() / 2.0;
    EXPECT_NEAR(edges / (500 * pairs), p, 0.05) << "p=" << p;
  }
}

TEST(SampleActive, ForcedInclusionAndExclusion) {
  CommGraph base = CommGraph::cycle(6, true);
  EXPECT_EQ(sample_active(EdgeSchedule(base, 1.0, 4), 9), base);
  EXPECT_EQ(sample_active(EdgeSchedule(base, 0.0, 4), 9).edge_count(), 0u);
}

TEST(SampleActive, UnionOverRoundsIsBase) {
  CommGraph base = CommGraph::cycle(6, true);
  EdgeSchedule s(base, 0.5, 11);
  CommGraph seen(6);
  for (std::uint64_t t = 0; t < 200; ++t) {
    CommGraph g = sample_active(s, t);
    EXPECT_TRUE(g.is_subgraph_of(base));
    EXPECT_TRUE(g.is_symmetric());
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (g.has_edge(i, j) && !seen.has_edge(i, j)) seen.add_edge(i, j);
  }
  EXPECT_EQ(seen, base);
}

TEST(SampleActive, Deterministic) {
  EdgeSchedule s(CommGraph::complete(7), 0.3, 99);
  for (std::uint64_t t = 0; t < 50; ++t) EXPECT_EQ(sample_active(s, t), sample_active(s, t));
}

TEST(SampleActive, GeneratorMustStayInsideBase) {
  CommGraph base = CommGraph::cycle(4, true);
  EdgeSchedule ok(base, [&](std::uint64_t t) {
    CommGraph g(4);
    if (t % 2 == 0) g.add_undirected_edge(0, 1);
    return g;
  });
  EXPECT_TRUE(sample_active(ok, 0).has_edge(1, 0));
  EXPECT_EQ(sample_active(ok, 1).edge_count(), 0u);
  EdgeSchedule bad(base, [](std::uint64_t) { return CommGraph::complete(4); });
  EXPECT_ANY_THROW(sample_active(bad, 0));
}

TEST(Connectivity, Basics) {
  EXPECT_TRUE(is_connected(CommGraph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}, false)));
  EXPECT_FALSE(is_connected(CommGraph::from_edges(4, {{0, 1}, {2, 3}}, true)));
  CommGraph path = CommGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}}, true);
  EXPECT_TRUE(is_connected(path));
  EXPECT_EQ(diameter(path), 3);
  EXPECT_FALSE(is_connected(CommGraph::from_edges(3, {{0, 1}, {1, 2}}, false)));
  EXPECT_EQ(diameter(CommGraph::from_edges(3, {{0, 1}, {1, 2}}, false)), -1);
}
