#include <gtest/gtest.h>

#include <cmath>

#include "qroute/montecarlo.hpp"
#include "sim_fixtures.hpp"

using namespace qroute;

namespace {

double three_se(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

Lane full_lane(const NetworkGraph& g, const PathSpec& path, const SwapPolicy& policy) {
  Lane lane = detail::make_lane(g, "r", path, policy);
  for (int h = 0; h < path.hops(); ++h) {
    lane.first_channel.push_back(0);
    lane.channel_count.push_back(path.per_hop_capacity[static_cast<std::size_t>(h)]);
  }
  return lane;
}

}  // namespace

TEST(Rng, KeyedDrawsAreStable) {
  const KeyedRng a(42), b(42), c(43);
  EXPECT_EQ(a.bits(Stream::kExternal, {1, 2, 3}), b.bits(Stream::kExternal, {1, 2, 3}));
  EXPECT_NE(a.bits(Stream::kExternal, {1, 2, 3}), c.bits(Stream::kExternal, {1, 2, 3}));
  EXPECT_NE(a.bits(Stream::kExternal, {1, 2, 3}), a.bits(Stream::kSwap, {1, 2, 3}));
  EXPECT_NE(a.bits(Stream::kExternal, {1, 2, 3}), a.bits(Stream::kExternal, {1, 3, 2}));
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = a.uniform(Stream::kSwap, {i});
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(ExternalPhase, CertainAndImpossibleLinks) {
  const auto g = build_graph({{"A"}, {"B"}}, {{"A", "B", 2, 0.0, 1.0}}, {});
  SlotState state;
  const KeyedRng rng(1);
  const std::vector<int> scope{2};
  EXPECT_EQ(sample_external_phase(g, scope, rng, state).size(), 2u);
  // Both channels now hold live links, so nothing new can be created.
  EXPECT_TRUE(sample_external_phase(g, scope, rng, state).empty());

  const auto dead = build_graph({{"A"}, {"B"}}, {{"A", "B", 2, 0.0, 0.0}}, {});
  SlotState s2;
  EXPECT_TRUE(sample_external_phase(dead, scope, rng, s2).empty());
  const std::vector<int> too_wide{3};
  EXPECT_THROW(sample_external_phase(g, too_wide, rng, s2), ValidationError);
}

TEST(ExternalPhase, SeedDeterminesRealization) {
  const auto g = grid_topology(3, 3, {"", "", 3, 0.0, 0.4}, {});
  const std::vector<int> scope(g.edge_count(), 3);
  auto realize = [&](std::uint64_t seed) {
    SlotState s;
    std::vector<std::pair<int, int>> out;
    for (const auto& l : sample_external_phase(g, scope, KeyedRng(seed), s)) out.emplace_back(l.edge, l.channel);
    return out;
  };
  EXPECT_EQ(realize(42), realize(42));
  EXPECT_NE(realize(42), realize(43));
}

TEST(InternalPhase, PerfectSwapsDeliver) {
  const auto path = PathSpec::chain({1, 1}, {1.0, 1.0}, {1.0});
  const auto g = fixture::chain_graph(path, 2);
  const KeyedRng rng(5);
  for (auto policy : {SwapPolicy::sequential(), SwapPolicy::doubling(), SwapPolicy::parallel(), SwapPolicy::ad_hoc()}) {
    SlotState state;
    Ledger ledger;
    sample_external_phase(g, std::vector<int>{1, 1}, rng, state, &ledger);
    const std::vector<Lane> lanes{full_lane(g, path, policy)};
    const auto mode = policy.kind == PolicyKind::kAdHoc ? Forwarding::kAsync : Forwarding::kSync;
    const auto res = run_internal_phase(state, lanes, mode, rng, &ledger);
    EXPECT_EQ(res.delivered_per_lane, (std::vector<int>{1})) << policy.name();
    EXPECT_EQ(ledger.live(), 0u);
    EXPECT_EQ(ledger.swapped(), 2u);
    EXPECT_EQ(ledger.delivered(), 1u);
  }
}

TEST(InternalPhase, MissingLinkLeavesSurvivorForDiscard) {
  const auto path = PathSpec::chain({1, 1}, {1.0, 0.0}, {1.0});
  const auto g = fixture::chain_graph(path);
  const KeyedRng rng(5);
  SlotState state;
  Ledger ledger;
  state.live_links.resize(g.edge_count());
  sample_external_phase(g, std::vector<int>{1, 1}, rng, state, &ledger);
  const std::vector<Lane> lanes{full_lane(g, path, SwapPolicy::parallel())};
  const auto res = run_internal_phase(state, lanes, Forwarding::kSync, rng, &ledger);
  EXPECT_EQ(res.delivered_per_lane, (std::vector<int>{0}));
  EXPECT_EQ(state.record_count(), 1u);
  detail::discard_all(state, &ledger);
  EXPECT_EQ(ledger.discarded(), 1u);
  EXPECT_EQ(ledger.live(), 0u);
}

TEST(InternalPhase, AdHocNeedsAsync) {
  const auto path = PathSpec::chain({1, 1}, {1.0, 1.0}, {1.0});
  const auto g = fixture::chain_graph(path);
  SlotState state;
  state.live_links.resize(g.edge_count());
  const std::vector<Lane> lanes{full_lane(g, path, SwapPolicy::ad_hoc())};
  EXPECT_THROW(run_internal_phase(state, lanes, Forwarding::kSync, KeyedRng(1)), ValidationError);
}

TEST(Simulate, SingleEdgeBernoulliRate) {
  const auto path = PathSpec::chain({1}, {0.5}, {});
  const auto g = fixture::chain_graph(path);
  const auto stats =
      simulate(g, fixture::single_path_plan(g, path, SwapPolicy::doubling()), fixture::sim_config(Forwarding::kSync, 100000, 9));
  const double rate = static_cast<double>(stats.delivered_per_request.at("r")) / 1e5;
  EXPECT_NEAR(rate, 0.5, three_se(0.5, 1e5));
  EXPECT_EQ(stats.slots_run, 100000);
}

TEST(Simulate, FourHopDoublingRate) {
  const auto path = PathSpec::chain({1, 1, 1, 1}, {1, 1, 1, 1}, {0.5, 0.5, 0.5});
  const auto g = fixture::chain_graph(path);
  const auto stats =
      simulate(g, fixture::single_path_plan(g, path, SwapPolicy::doubling()), fixture::sim_config(Forwarding::kSync, 100000, 4));
  EXPECT_NEAR(stats.lanes[0].delivered / 1e5, 0.125, three_se(0.125, 1e5));
}

TEST(Simulate, ThreeHopSyncRateAndAsyncGain) {
  const auto path = PathSpec::chain({1, 1, 1}, {0.8, 0.8, 0.8}, {0.5, 0.5});
  const auto sync_g = fixture::chain_graph(path, 1);
  const auto async_g = fixture::chain_graph(path, 5);
  const auto sync = simulate(sync_g, fixture::single_path_plan(sync_g, path, SwapPolicy::doubling()),
                             fixture::sim_config(Forwarding::kSync, 100000, 12));
  const double want = 0.8 * 0.8 * 0.8 * 0.25;
  EXPECT_NEAR(sync.lanes[0].delivered / 1e5, want, three_se(want, 1e5));
  const auto async = simulate(async_g, fixture::single_path_plan(async_g, path, SwapPolicy::ad_hoc()),
                              fixture::sim_config(Forwarding::kAsync, 100000, 12));
  EXPECT_GT(async.lanes[0].delivered, sync.lanes[0].delivered);
  EXPECT_GT(async.records_expired, 0u);
}

TEST(Simulate, OneSlotMemoryMakesModesCoincide) {
  const auto path = PathSpec::chain({2, 1, 2}, {0.7, 0.9, 0.6}, {0.5, 0.8});
  const auto g = fixture::chain_graph(path, 1);
  const auto plan = fixture::single_path_plan(g, path, SwapPolicy::doubling());
  const auto sync = simulate(g, plan, fixture::sim_config(Forwarding::kSync, 20000, 3));
  const auto async = simulate(g, plan, fixture::sim_config(Forwarding::kAsync, 20000, 3));
  EXPECT_EQ(sync.lanes[0].histogram, async.lanes[0].histogram);
  EXPECT_EQ(sync.records_swapped, async.records_swapped);
  EXPECT_EQ(async.records_discarded, 0u);
  EXPECT_FALSE(async.warnings.empty());
}

TEST(Simulate, DeterministicInSeed) {
  const auto path = PathSpec::chain({2, 2, 2}, {0.6, 0.7, 0.8}, {0.5, 0.6});
  const auto g = fixture::chain_graph(path, 3);
  const auto plan = fixture::single_path_plan(g, path, SwapPolicy::ad_hoc());
  const auto a = simulate(g, plan, fixture::sim_config(Forwarding::kAsync, 5000, 8));
  const auto b = simulate(g, plan, fixture::sim_config(Forwarding::kAsync, 5000, 8));
  const auto c = simulate(g, plan, fixture::sim_config(Forwarding::kAsync, 5000, 9));
  EXPECT_EQ(a.lanes[0].histogram, b.lanes[0].histogram);
  EXPECT_EQ(a.links_created, b.links_created);
  EXPECT_NE(a.lanes[0].histogram, c.lanes[0].histogram);
}

TEST(Simulate, RecordsAreConserved) {
  const auto path = PathSpec::chain({2, 2, 2, 2}, {0.6, 0.7, 0.8, 0.9}, {0.5, 0.6, 0.7});
  const auto g = fixture::chain_graph(path, 4);
  for (auto policy : {SwapPolicy::sequential(), SwapPolicy::doubling(), SwapPolicy::parallel(), SwapPolicy::ad_hoc()}) {
    for (auto mode : {Forwarding::kSync, Forwarding::kAsync}) {
      if (policy.kind == PolicyKind::kAdHoc && mode == Forwarding::kSync) continue;
      const auto s = simulate(g, fixture::single_path_plan(g, path, policy), fixture::sim_config(mode, 3000, 2));
      const auto retired = s.records_swapped + s.records_delivered + s.records_expired + s.records_discarded;
      EXPECT_LE(retired, s.links_created + s.records_swapped);  // swaps create merged records too
      EXPECT_EQ(s.records_delivered, s.lanes[0].delivered);
      if (mode == Forwarding::kSync) EXPECT_EQ(s.records_expired, 0u);
    }
  }
}

TEST(Simulate, MultiRequestPlanSharesEdges) {
  const auto g = build_graph({{"A", 0.5, 1}, {"B", 0.5, 1}, {"C", 0.5, 1}},
                             {{"A", "B", 3, 0.0, 0.7}, {"B", "C", 3, 0.0, 0.7}}, {});
  const std::vector<Request> reqs{{"x", "A", "C", 1.0, 0.5}, {"y", "A", "B", 1.0, 0.5}};
  const auto plan = allocate(g, reqs, {});
  const auto stats = simulate(g, plan, fixture::sim_config(Forwarding::kSync, 20000, 1));
  for (std::size_t i = 0; i < stats.lanes.size(); ++i) {
    const auto& ls = stats.lanes[i];
    const double want = request_throughput(plan, ls.request_id);
    if (plan.find(ls.request_id).paths.size() != 1) continue;
    EXPECT_NEAR(ls.delivered / 20000.0, want, 4.0 * std::sqrt(ls.width * 0.25 / 20000.0) + 1e-9);
  }
}

TEST(Simulate, ReactiveMatchesProactiveOnUnitChain) {
  const auto path = PathSpec::chain({1, 1, 1}, {0.8, 0.7, 0.9}, {0.5, 0.6});
  const auto g = fixture::chain_graph(path);
  auto cfg = fixture::sim_config(Forwarding::kSync, 20000, 21);
  const auto pro = simulate(g, fixture::single_path_plan(g, path, SwapPolicy::doubling()), cfg);
  cfg.scheme = RoutingScheme::kReactive;
  const auto re = simulate(g, std::vector<Request>{{"r", "0", "3", 1.0, 0.5}}, cfg);
  EXPECT_EQ(pro.delivered_per_request.at("r"), re.delivered_per_request.at("r"));
}

TEST(Simulate, ReactiveUsesParallelRoutes) {
  const auto g = grid_topology(3, 3, {"", "", 1, 0.0, 0.9}, {"", 0.9, 1});
  auto cfg = fixture::sim_config(Forwarding::kSync, 5000, 6);
  cfg.scheme = RoutingScheme::kReactive;
  cfg.reactive_max_paths = 1;
  const std::vector<Request> reqs{{"r", "0,0", "2,2", 1.0, 0.5}};
  const auto one = simulate(g, reqs, cfg);
  cfg.reactive_max_paths = 4;
  const auto many = simulate(g, reqs, cfg);
  EXPECT_GT(many.delivered_per_request.at("r"), one.delivered_per_request.at("r"));
  cfg.f0 = 0.99;
  const std::vector<Request> strict{{"r", "0,0", "2,2", 1.0, 0.985}};
  ASSERT_LT(max_hops(0.99, 0.985), 4);
  EXPECT_EQ(simulate(g, strict, cfg).delivered_per_request.at("r"), 0u);
}

TEST(Simulate, InvalidConfigurations) {
  const auto path = PathSpec::chain({1, 1}, {0.5, 0.5}, {0.5});
  const auto g = fixture::chain_graph(path);
  const auto plan = fixture::single_path_plan(g, path, SwapPolicy::ad_hoc());
  EXPECT_THROW(simulate(g, plan, fixture::sim_config(Forwarding::kSync, 10, 1)), ValidationError);
  auto cfg = fixture::sim_config(Forwarding::kAsync, 10, 1);
  cfg.scheme = RoutingScheme::kReactive;
  EXPECT_THROW(simulate(g, std::vector<Request>{}, cfg), ValidationError);
  auto zero = fixture::sim_config(Forwarding::kSync, 0, 1);
  EXPECT_THROW(simulate(g, fixture::single_path_plan(g, path, SwapPolicy::doubling()), zero), ValidationError);
  auto wide = fixture::single_path_plan(g, path.with_width(2), SwapPolicy::doubling());
  EXPECT_THROW(simulate(g, wide, fixture::sim_config(Forwarding::kSync, 10, 1)), ValidationError);
}

TEST(Simulate, EmptyPlanRuns) {
  const auto g = build_graph({{"A"}, {"B"}}, {{"A", "B", 1, 0.0, 0.5}}, {});
  const auto stats = simulate(g, AllocationPlan{}, fixture::sim_config(Forwarding::kSync, 10, 1));
  EXPECT_TRUE(stats.lanes.empty());
  EXPECT_EQ(stats.links_created, 0u);
}
