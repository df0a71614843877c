#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "qroute/pathfind.hpp"

using namespace qroute;

namespace {

NetworkGraph triangle() {
  return build_graph({{"A"}, {"B"}, {"C"}},
                     {{"A", "B", 1, 10.0, 0.9}, {"B", "C", 1, 10.0, 0.9}, {"A", "C", 1, 25.0, 0.5}}, {});
}

double oracle_cost(const oracle::RouteScore& s, Metric m) {
  switch (m) {
    case Metric::kHopCount: return s.hops;
    case Metric::kSumNodeDistances: return s.km;
    case Metric::kInverseCreationRate: return s.inv_rate;
    default: return 0.0;
  }
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Pathfind, PathCostExamples) {
  auto p = PathSpec::chain({2, 3}, {0.5, 0.5}, {0.5});
  p.per_hop_length_km = {10.0, 10.0};
  EXPECT_DOUBLE_EQ(path_cost(p, Metric::kSumNodeDistances), 20.0);
  EXPECT_DOUBLE_EQ(path_cost(p, Metric::kInverseCreationRate), 4.0);
  EXPECT_DOUBLE_EQ(path_cost(p, Metric::kBottleneckWidth), -2.0);
  EXPECT_DOUBLE_EQ(path_cost(p, Metric::kHopCount), 2.0);
  const auto seq = oracle::heralded(p, SwapOrderTree::sequential(2));
  EXPECT_NEAR(path_cost(p, Metric::kExpectedThroughputSequential), -oracle::mean(seq), 1e-12);
}

TEST(Pathfind, MetricNames) {
  for (Metric m : {Metric::kHopCount, Metric::kSumNodeDistances, Metric::kInverseCreationRate,
                   Metric::kBottleneckWidth, Metric::kExpectedThroughputSequential}) {
    EXPECT_EQ(parse_metric(metric_name(m)), m);
  }
  EXPECT_THROW(parse_metric("fastest"), ValidationError);
}

TEST(Pathfind, TriangleShortest) {
  const auto g = triangle();
  const auto by_km = shortest_path(g, "A", "C", Metric::kSumNodeDistances);
  ASSERT_TRUE(by_km);
  EXPECT_EQ(by_km->nodes, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_DOUBLE_EQ(path_cost(*by_km, Metric::kSumNodeDistances), 20.0);
  const auto by_hops = shortest_path(g, "A", "C", Metric::kHopCount);
  ASSERT_TRUE(by_hops);
  EXPECT_EQ(by_hops->nodes, (std::vector<std::string>{"A", "C"}));
  EXPECT_THROW(shortest_path(g, "A", "C", Metric::kBottleneckWidth), ValidationError);
  EXPECT_THROW(shortest_path(g, "A", "Q", Metric::kHopCount), ValidationError);
}

TEST(Pathfind, TriangleKShortest) {
  const auto paths = k_shortest_paths(triangle(), "A", "C", 2, Metric::kSumNodeDistances);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].nodes, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(paths[1].nodes, (std::vector<std::string>{"A", "C"}));
  EXPECT_DOUBLE_EQ(path_cost(paths[1], Metric::kSumNodeDistances), 25.0);
}

TEST(Pathfind, DisconnectedPair) {
  const auto g = build_graph({{"A"}, {"B"}, {"C"}, {"D"}}, {{"A", "B", 1, 1.0, 0.9}, {"C", "D", 1, 1.0, 0.9}}, {});
  EXPECT_TRUE(k_shortest_paths(g, "A", "D", 3, Metric::kHopCount).empty());
  EXPECT_FALSE(shortest_path(g, "A", "D", Metric::kHopCount));
  EXPECT_FALSE(widest_path(g, "A", "D"));
}

TEST(Pathfind, ZeroCapacityEdgesSkipped) {
  const auto g = build_graph({{"A"}, {"B"}, {"C"}},
                             {{"A", "C", 0, 1.0, 0.9}, {"A", "B", 1, 1.0, 0.9}, {"B", "C", 1, 1.0, 0.9}}, {});
  const auto p = shortest_path(g, "A", "C", Metric::kHopCount);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->hops(), 2);
}

TEST(Pathfind, WidestExamples) {
  const auto g = build_graph({{"s"}, {"a"}, {"b"}, {"d"}},
                             {{"s", "a", 3, 1.0, 0.5}, {"a", "d", 3, 1.0, 0.5}, {"s", "b", 1, 1.0, 0.9},
                              {"b", "d", 1, 1.0, 0.9}},
                             {});
  const auto wide = widest_path(g, "s", "d");
  ASSERT_TRUE(wide);
  EXPECT_EQ(wide->nodes, (std::vector<std::string>{"s", "a", "d"}));
  EXPECT_EQ(wide->width(), 3);

  const auto eq = build_graph({{"s"}, {"a"}, {"b"}, {"d"}},
                              {{"s", "a", 2, 1.0, 0.5}, {"a", "d", 2, 1.0, 0.9}, {"s", "b", 2, 1.0, 0.9},
                               {"b", "d", 2, 1.0, 0.9}},
                              {});
  const auto rate = widest_path(eq, "s", "d");
  ASSERT_TRUE(rate);
  // 1/(0.9*0.9) = 1.23 beats 1/(0.5*0.9) = 2.22
  EXPECT_EQ(rate->nodes, (std::vector<std::string>{"s", "b", "d"}));

  const auto single = build_graph({{"s"}, {"d"}}, {{"s", "d", 4, 1.0, 0.3}}, {});
  const auto one = widest_path(single, "s", "d");
  ASSERT_TRUE(one);
  EXPECT_EQ(one->hops(), 1);
  EXPECT_EQ(one->width(), 4);
}

TEST(Pathfind, ResidualConstraints) {
  const auto g = triangle();
  SearchConstraints c{{1, 0, 1}, 1};  // edges sorted (A,B), (A,C), (B,C)
  const auto p = shortest_path(g, "A", "C", Metric::kHopCount, c);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->nodes, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(p->per_hop_capacity, (std::vector<int>{1, 1}));
}

TEST(Pathfind, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_graph(rng, 8, 3, 0.35);
    const int s = 0;
    const int d = static_cast<int>(g.node_count()) - 1;
    const auto& sid = g.node(s).id;
    const auto& did = g.node(d).id;
    std::vector<int> caps;
    for (const auto& e : g.edges()) caps.push_back(e.capacity());
    const auto routes = oracle::simple_paths(g, s, d, caps);
    ASSERT_FALSE(routes.empty());
    for (Metric m : {Metric::kHopCount, Metric::kSumNodeDistances, Metric::kInverseCreationRate}) {
      std::vector<double> costs;
      for (const auto& r : routes) costs.push_back(oracle_cost(oracle::score(g, r, caps), m));
      std::sort(costs.begin(), costs.end());
      const auto best = shortest_path(g, sid, did, m);
      ASSERT_TRUE(best);
      EXPECT_TRUE(close(path_cost(*best, m), costs.front())) << metric_name(m);

      const int k = 5;
      const auto ks = k_shortest_paths(g, sid, did, k, m);
      ASSERT_EQ(ks.size(), std::min<std::size_t>(k, routes.size()));
      std::set<std::vector<std::string>> distinct;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        EXPECT_TRUE(close(path_cost(ks[i], m), costs[i])) << metric_name(m) << " rank " << i;
        distinct.insert(ks[i].nodes);
        EXPECT_NO_THROW(ks[i].validate());
      }
      EXPECT_EQ(distinct.size(), ks.size());
    }
    int best_width = 0;
    double best_rate = 1e300;
    for (const auto& r : routes) {
      const auto sc = oracle::score(g, r, caps);
      if (sc.width > best_width) {
        best_width = static_cast<int>(sc.width);
        best_rate = sc.inv_rate;
      } else if (sc.width == best_width) {
        best_rate = std::min(best_rate, sc.inv_rate);
      }
    }
    const auto wide = widest_path(g, sid, did);
    ASSERT_TRUE(wide);
    EXPECT_EQ(wide->width(), best_width);
    EXPECT_TRUE(close(path_cost(*wide, Metric::kInverseCreationRate), best_rate));
  }
}

TEST(Pathfind, KShortestDeterministicTies) {
  // Two equal-cost routes; the lexicographically smaller node sequence first.
  const auto g = build_graph({{"s"}, {"a"}, {"b"}, {"d"}},
                             {{"s", "a", 1, 1.0, 0.9}, {"a", "d", 1, 1.0, 0.9}, {"s", "b", 1, 1.0, 0.9},
                              {"b", "d", 1, 1.0, 0.9}},
                             {});
  const auto ks = k_shortest_paths(g, "s", "d", 2, Metric::kHopCount);
  ASSERT_EQ(ks.size(), 2u);
  EXPECT_EQ(ks[0].nodes, (std::vector<std::string>{"s", "a", "d"}));
  EXPECT_EQ(ks[1].nodes, (std::vector<std::string>{"s", "b", "d"}));
}

TEST(Pathfind, DisjointOnLogicalGrid) {
  const auto g = grid_topology(3, 3, {"", "", 2, 1.0, 0.9}, {});
  LogicalTopology logical{std::vector<int>(g.edge_count(), 0)};
  auto realize = [&](const std::vector<std::string>& ids) {
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      logical.counts[static_cast<std::size_t>(*g.edge_between(g.node_index(ids[i]), g.node_index(ids[i + 1])))] = 1;
    }
  };
  const std::vector<std::string> top{"0,0", "0,1", "0,2", "1,2", "2,2"};
  const std::vector<std::string> bottom{"0,0", "1,0", "2,0", "2,1", "2,2"};
  realize(top);
  realize(bottom);
  const auto paths = disjoint_paths_on_logical(logical, g, "0,0", "2,2", 4);
  ASSERT_EQ(paths.size(), 2u);
  std::set<std::vector<std::string>> got{paths[0].nodes, paths[1].nodes};
  EXPECT_EQ(got, (std::set<std::vector<std::string>>{top, bottom}));
  for (const auto& p : paths) EXPECT_EQ(p.width(), 1);

  const auto nd = disjoint_paths_on_logical(logical, g, "0,0", "2,2", 4, {true, std::nullopt});
  EXPECT_EQ(nd.size(), 2u);
  const auto limited = disjoint_paths_on_logical(logical, g, "0,0", "2,2", 4, {false, 3});
  EXPECT_TRUE(limited.empty());
}

TEST(Pathfind, DisjointEdgeCases) {
  const auto g = build_graph({{"s"}, {"x"}, {"d"}}, {{"s", "x", 2, 1.0, 0.9}, {"x", "d", 2, 1.0, 0.9}}, {});
  LogicalTopology none{{0, 1}};
  EXPECT_TRUE(disjoint_paths_on_logical(none, g, "s", "d", 3).empty());
  LogicalTopology chain{{1, 1}};
  const auto one = disjoint_paths_on_logical(chain, g, "s", "d", 3);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].hops(), 2);
  LogicalTopology doubled{{2, 2}};
  EXPECT_EQ(disjoint_paths_on_logical(doubled, g, "s", "d", 3).size(), 2u);
  EXPECT_EQ(disjoint_paths_on_logical(doubled, g, "s", "d", 3, {true, std::nullopt}).size(), 1u);
  LogicalTopology bad{{3, 0}};
  EXPECT_THROW(disjoint_paths_on_logical(bad, g, "s", "d", 3), ValidationError);
}

TEST(Pathfind, MakePathFromIds) {
  const auto g = triangle();
  const auto p = make_path(g, std::vector<std::string>{"A", "B", "C"});
  EXPECT_EQ(p.per_hop_length_km, (std::vector<double>{10.0, 10.0}));
  EXPECT_EQ(path_edges(g, p).size(), 2u);
  EXPECT_THROW(make_path(g, std::vector<std::string>{"A", "B", "A"}), ValidationError);
}
