// Copyright 2026 The wdp-triage Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wdp_triage/core_model.hpp"
#include "wdp_triage/generators.hpp"

namespace wdp {
namespace {

WdpInstance single_bid() {
  WdpInstance inst;
  inst.name = "one";
  inst.items = {{0, 1.0}};
  inst.bids = {{0, 5.0, {0}, 1.0}};
  return inst;
}

TEST(Validate, TrapInstanceIsClean) {
  EXPECT_TRUE(validate(gen_trap({3, 100, 40, 0, 0, 1}).instance).empty());
  EXPECT_TRUE(validate(gen_kstar({5, 0, 0, 0.01, 0, 1}).instance).empty());
}

TEST(Validate, ZeroDemandNamesTheBid) {
  WdpInstance inst = single_bid();
  inst.bids.push_back({7, 1.0, {0}, 0.0});
  const auto problems = validate(inst);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("bid 7"), std::string::npos);
}

TEST(Validate, UnknownItemIsOneViolation) {
  WdpInstance inst = single_bid();
  inst.bids.push_back({1, 1.0, {42}, 1.0});
  const auto problems = validate(inst);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("42"), std::string::npos);
}

TEST(Validate, CatchesEveryBrokenInvariant) {
  WdpInstance inst;
  EXPECT_EQ(validate(inst).size(), 2u);  // no items, no bids
  inst.items = {{0, 0.0}, {0, 1.0}};
  inst.bids = {{0, -1.0, {}, 1.0}, {0, 1.0, {0, 0}, 1.0}};
  // zero capacity, duplicate item, negative value, empty set, duplicate bid,
  // repeated item inside a bid
  EXPECT_EQ(validate(inst).size(), 6u);
  EXPECT_THROW(require_valid(inst), Error);
}

TEST(Allocation, WelfareAndFeasibility) {
  const WdpInstance inst = gen_kstar({3, 0, 0, 0.5, 0, 0}).instance;
  const Allocation whale = make_allocation(inst, {true, false, false, false});
  EXPECT_TRUE(whale.feasible);
  EXPECT_EQ(whale.welfare, 1.5);
  const Allocation clash = make_allocation(inst, {true, true, false, false});
  EXPECT_FALSE(clash.feasible);
  EXPECT_THROW(make_allocation(inst, {true}), Error);
}

TEST(Allocation, CapacityToleranceIsAbsolute) {
  WdpInstance inst;
  inst.items = {{0, 0.3}};
  inst.bids = {{0, 1, {0}, 0.1}, {1, 1, {0}, 0.2}};
  EXPECT_TRUE(make_allocation(inst, {true, true}).feasible);  // 0.1 + 0.2 > 0.3 by 5e-17
  inst.items[0].capacity = 0.3 - 1e-8;
  EXPECT_FALSE(make_allocation(inst, {true, true}).feasible);
}

TEST(Allocation, FeasibilityIsMonotone) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, {});
    std::vector<bool> take = oracle::greedy(inst);
    ASSERT_TRUE(make_allocation(inst, take).feasible);
    for (std::size_t i = 0; i < take.size(); ++i) {
      if (!take[i]) continue;
      take[i] = false;
      EXPECT_TRUE(make_allocation(inst, take).feasible);
    }
  }
}

TEST(ConflictGraph, WhaleAndFishFormAStar) {
  const WdpInstance inst = gen_trap({4, 100, 40, 0, 8, 0}).instance;
  const MwisInstance g = conflict_graph(inst);
  ASSERT_EQ(g.num_nodes(), 5u);
  ASSERT_EQ(g.edges.size(), 4u);
  for (auto [a, b] : g.edges) {
    EXPECT_EQ(a, 0u);  // whale is bid 0
    EXPECT_GT(b, 0u);
  }
  EXPECT_EQ(g.weights[0], 100.0);
}

TEST(ConflictGraph, SingleBidHasNoEdges) {
  const MwisInstance g = conflict_graph(single_bid());
  EXPECT_EQ(g.num_nodes(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(ConflictGraph, EdgesMatchPairwiseIntersection) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 30; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, {});
    std::set<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t i = 0; i < inst.bids.size(); ++i)
      for (std::size_t j = i + 1; j < inst.bids.size(); ++j) {
        const auto& a = inst.bids[i].items;
        const auto& b = inst.bids[j].items;
        if (std::any_of(a.begin(), a.end(),
                        [&](ItemId e) { return std::find(b.begin(), b.end(), e) != b.end(); }))
          expected.insert({i, j});
      }
    const MwisInstance g = conflict_graph(inst);
    std::set<std::pair<std::size_t, std::size_t>> got(g.edges.begin(), g.edges.end());
    EXPECT_EQ(got, expected);
    EXPECT_TRUE(validate(g).empty());
  }
}

TEST(ConflictGraph, TenRandomUnitBidsShareTheOptimum) {
  std::mt19937_64 rng(10);
  oracle::RandomShape shape;
  shape.min_bids = shape.max_bids = 10;
  shape.unit = true;
  for (int t = 0; t < 20; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, shape);
    const MwisInstance g = conflict_graph(inst);
    EXPECT_EQ(oracle::brute_force(inst), oracle::mwis(g.weights, g.edges));
  }
}

TEST(MwisToWdp, TriangleOptimumIsThree) {
  const MwisInstance tri{{3, 2, 2}, {{0, 1}, {0, 2}, {1, 2}}};
  const WdpInstance inst = mwis_to_wdp(tri);
  EXPECT_EQ(inst.num_bids(), 3u);
  EXPECT_EQ(inst.num_items(), 3u);
  EXPECT_EQ(oracle::brute_force(inst), 3.0);
}

TEST(MwisToWdp, EdgelessGraphAcceptsEverything) {
  const MwisInstance g{{1.5, 2, 3, 4}, {}};
  const WdpInstance inst = mwis_to_wdp(g);
  EXPECT_EQ(inst.num_items(), 4u);  // one private item each
  EXPECT_EQ(oracle::brute_force(inst), 10.5);
  for (const auto& b : inst.bids) EXPECT_EQ(b.items.size(), 1u);
}

TEST(MwisToWdp, StarRoundTripKeepsOptimum) {
  const WdpInstance trap = gen_trap({5, 100, 30, 0, 0, 0}).instance;
  const MwisInstance g = conflict_graph(trap);
  const WdpInstance back = mwis_to_wdp(g);
  EXPECT_EQ(oracle::brute_force(trap), oracle::brute_force(back));
  EXPECT_EQ(oracle::mwis(g.weights, g.edges), 150.0);
}

TEST(MwisToWdp, ConflictGraphReproducesEdges) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    MwisInstance g;
    const std::size_t n = 1 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) g.weights.push_back(1 + rng() % 50);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng() % 3 == 0) g.edges.emplace_back(i, j);
    const MwisInstance again = conflict_graph(mwis_to_wdp(g));
    EXPECT_EQ(again.edges, g.edges);
    EXPECT_EQ(again.weights, g.weights);
  }
}

TEST(MwisToWdp, RejectsBrokenGraphs) {
  EXPECT_THROW(mwis_to_wdp({{1, 1}, {{0, 0}}}), Error);
  EXPECT_THROW(mwis_to_wdp({{1, 1}, {{0, 1}, {1, 0}}}), Error);
  EXPECT_THROW(mwis_to_wdp({{1, -1}, {}}), Error);
  EXPECT_THROW(mwis_to_wdp({{1}, {{0, 3}}}), Error);
}

}  // namespace
}  // namespace wdp
