#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mbcg/bench.hpp"

using namespace mbcg;

namespace {

Instance dt9(int k, double baud, Mode mode = Mode::rwa) {
  auto topo = load_topology(std::string(MBCG_DATA_DIR) + "/topologies/dt9.csv");
  InstanceSpec s;
  s.k = k;
  s.baud_hz = baud;
  s.mode = mode;
  return make_instance(topo, PhysicalEnvironment{}, s);
}

Instance single_pair(int w, double c) {
  NetworkTopology topo("line", {"a", "b"}, {{0, 1, 2}});
  RouteSet routes(topo, 1, {{0, 1}});
  std::vector<std::array<double, kBandCount>> v{{c, c, c}};
  return make_instance(topo, routes, CapacityMatrix(Mode::rwa, v), {1.0}, Mode::rwa, {0, 0, w});
}

}  // namespace

TEST(Loading, NoWavelengthsBlocksImmediately) {
  auto inst = single_pair(0, 100e9);
  for (Strategy s : {Strategy::ksp_ff, Strategy::ff_ksp}) {
    auto r = sequential_load(inst, s, 1);
    EXPECT_DOUBLE_EQ(r.throughput_bps, 0.0);
    EXPECT_TRUE(r.lightpaths.empty());
  }
}

TEST(Loading, SinglePairClosedForm) {
  for (int w : {1, 3, 8}) {
    auto inst = single_pair(w, 100e9);
    for (Strategy s : {Strategy::ksp_ff, Strategy::ff_ksp}) {
      auto r = sequential_load(inst, s, 5);
      EXPECT_EQ(r.lightpaths.size(), static_cast<std::size_t>(w));
      EXPECT_NEAR(r.throughput_bps, w * 100e9, 1e-3);
      EXPECT_DOUBLE_EQ(r.unit_bps, 100e9);
    }
  }
}

TEST(Loading, ResidualCapacityServedBeforeNewLightpath) {
  NetworkTopology topo("line", {"a", "b"}, {{0, 1, 2}});
  RouteSet routes(topo, 1);
  std::vector<std::array<double, kBandCount>> v{{300e9, 300e9, 300e9}, {100e9, 100e9, 100e9}};
  auto inst = make_instance(topo, routes, CapacityMatrix(Mode::rwa, v), {0.5, 0.5}, Mode::rwa, {0, 0, 3});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto r = sequential_load(inst, Strategy::ksp_ff, seed);
    EXPECT_DOUBLE_EQ(r.unit_bps, 100e9);
    // One 300G lightpath serves a->b for three units; b->a needs one per unit
    // and blocks on its third.
    ASSERT_EQ(r.lightpaths.size(), 3u);
    EXPECT_NEAR(r.established_bps[0], 300e9, 1e-3);
    EXPECT_NEAR(r.carried_bps[1], 200e9, 1e-3);
    EXPECT_GE(r.carried_bps[0], 200e9 - 1e-3);
  }
}

TEST(Loading, StrategiesAgreeWithOneRouteOneWavelength) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    auto topo = fixture::random_topology(rng, 4);
    InstanceSpec s;
    s.k = 1;
    s.wavelengths = 1;
    auto inst = make_instance(topo, PhysicalEnvironment{}, s);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto a = sequential_load(inst, Strategy::ksp_ff, seed);
      auto b = sequential_load(inst, Strategy::ff_ksp, seed);
      EXPECT_EQ(a.steps, b.steps);
      ASSERT_EQ(a.lightpaths.size(), b.lightpaths.size());
      for (std::size_t i = 0; i < a.lightpaths.size(); ++i) EXPECT_EQ(a.lightpaths[i].route, b.lightpaths[i].route);
    }
  }
}

TEST(Loading, InvariantsOnRandomInstances) {
  std::mt19937_64 rng(6);
  PhysicalEnvironment env;
  for (int t = 0; t < 60; ++t) {
    auto inst = fixture::desk_instance(rng, env);
    if (draw_below(rng, 3) == 0) inst.transceivers = 1 + static_cast<long>(draw_below(rng, 6));
    for (Strategy s : {Strategy::ksp_ff, Strategy::ff_ksp}) {
      auto r = sequential_load(inst, s, t, true);
      auto check = check_lightpaths(inst, r.lightpaths);
      EXPECT_TRUE(check.ok) << (check.problems.empty() ? "" : check.problems[0]);
      for (std::size_t i = 1; i < r.history_bps.size(); ++i) EXPECT_GE(r.history_bps[i], r.history_bps[i - 1]);
      for (std::size_t p = 0; p < inst.routes.pair_count(); ++p) {
        EXPECT_LE(r.carried_bps[p], r.established_bps[p] + 1e-3);
        EXPECT_NEAR(r.established_bps[p], check.pair_capacity_bps[p], 1e-3);
      }
      double carried = 0;
      for (double c : r.carried_bps) carried += c;
      EXPECT_NEAR(carried, r.throughput_bps, 1e-6 * carried + 1e-3);
    }
  }
}

TEST(Loading, FirstFitPicksLowestWavelength) {
  auto inst = dt9(3, 200e9);
  auto r = sequential_load(inst, Strategy::ff_ksp, 1);
  ASSERT_FALSE(r.lightpaths.empty());
  EXPECT_EQ(r.lightpaths.front().wavelength, 0);
  auto k = sequential_load(inst, Strategy::ksp_ff, 1);
  EXPECT_EQ(k.lightpaths.front().wavelength, 0);
  EXPECT_EQ(inst.routes.route(k.lightpaths.front().route).index, 1);
}

TEST(Loading, UnitIsSmallestPositiveCapacity) {
  auto inst = dt9(10, 25e9, Mode::rwba);
  double smallest = 1e300;
  for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
    for (Band b : kBands) {
      const double c = inst.capacity.at(r, b);
      if (c > 0) smallest = std::min(smallest, c);
    }
  }
  EXPECT_DOUBLE_EQ(loading_unit(inst), smallest);
}

TEST(DemandOrder, Deterministic) {
  auto d = uniform_demand(12);
  EXPECT_EQ(demand_order(d, 42, 500), demand_order(d, 42, 500));
  EXPECT_NE(demand_order(d, 42, 500), demand_order(d, 43, 500));
}

TEST(DemandOrder, RoundsArePermutations) {
  auto d = uniform_demand(7);
  auto order = demand_order(d, 9, 70);
  for (int round = 0; round < 10; ++round) {
    std::set<PairId> seen(order.begin() + round * 7, order.begin() + round * 7 + 7);
    EXPECT_EQ(seen.size(), 7u);
  }
}

TEST(DemandOrder, SinglePairIsIdentityStream) {
  auto order = demand_order({1.0}, 3, 100);
  for (PairId p : order) EXPECT_EQ(p, 0);
}

TEST(DemandOrder, FrequenciesFollowDemand) {
  auto equal = demand_order({0.5, 0.5}, 1, 100000);
  const auto zeros = std::count(equal.begin(), equal.end(), 0);
  EXPECT_NEAR(static_cast<double>(zeros) / 100000, 0.5, 0.005);

  auto skewed = demand_order({0.2, 0.8, 0.0}, 1, 100000);
  const auto first = std::count(skewed.begin(), skewed.end(), 0);
  EXPECT_NEAR(static_cast<double>(first) / 100000, 0.2, 0.005);
  EXPECT_EQ(std::count(skewed.begin(), skewed.end(), 2), 0);
}

TEST(Trials, SortedBySeedAndCsv) {
  auto inst = dt9(3, 200e9);
  auto rows = run_trials(inst, Strategy::ksp_ff, {5, 1, 3});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].seed, 1u);
  EXPECT_EQ(rows[2].seed, 5u);
  std::ostringstream a, b;
  write_trials_csv(a, rows);
  write_trials_csv(b, run_trials(inst, Strategy::ksp_ff, {1, 3, 5}));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "seed,strategy,throughput_bps,lightpaths,steps");
  EXPECT_THROW(parse_strategy("best-fit"), ModelError);
  EXPECT_EQ(parse_strategy("FF-kSP"), Strategy::ff_ksp);
}
