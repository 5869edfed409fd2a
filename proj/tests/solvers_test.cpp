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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wdp_triage/generators.hpp"
#include "wdp_triage/solvers.hpp"

namespace wdp {
namespace {

std::vector<bool> as_vector(const Allocation& a) { return a.accepted; }

TEST(Greedy, MatchesOracle) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 300; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, {});
    const SolveResult r = greedy(inst);
    EXPECT_EQ(as_vector(r.allocation), oracle::greedy(inst));
    EXPECT_TRUE(r.allocation.feasible);
  }
}

TEST(Greedy, TiesResolveByBidId) {
  WdpInstance inst;
  inst.items = {{0, 1.0}};
  inst.bids = {{9, 5.0, {0}, 1.0}, {3, 5.0, {0}, 1.0}};
  const SolveResult r = greedy(inst);
  EXPECT_FALSE(r.allocation.accepted[0]);
  EXPECT_TRUE(r.allocation.accepted[1]);
}

TEST(Greedy, InvariantUnderBidPermutation) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 100; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, {});
    WdpInstance shuffled = inst;
    std::shuffle(shuffled.bids.begin(), shuffled.bids.end(), rng);
    std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
    EXPECT_EQ(greedy(inst).welfare(), greedy(shuffled).welfare());
  }
}

TEST(Exact, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 300; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, {});
    const SolveResult e = exact(inst);
    EXPECT_TRUE(e.proven_optimal);
    EXPECT_TRUE(e.allocation.feasible);
    EXPECT_EQ(e.welfare(), oracle::brute_force(inst)) << "instance " << t;
    EXPECT_GE(e.welfare(), greedy(inst).welfare());
  }
}

TEST(Exact, MatchesLibraryBruteForce) {
  std::mt19937_64 rng(34);
  oracle::RandomShape shape;
  shape.min_bids = 12;
  shape.max_bids = 18;
  for (int t = 0; t < 20; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, shape);
    EXPECT_EQ(exact(inst).welfare(), brute_force(inst).welfare());
  }
}

TEST(Exact, SolvesManyIndependentTraps) {
  // 40 traps of 5 fish: far too many bids for one tree, trivial per component
  WdpInstance inst;
  detail::TrapCursor cursor;
  double optimal = 0.0;
  for (int t = 0; t < 40; ++t) optimal += detail::append_trap(inst, cursor, 5, 100, 30, 5).second;
  const SolveResult r = exact(inst, 10.0);
  EXPECT_TRUE(r.proven_optimal);
  EXPECT_EQ(r.welfare(), optimal);
}

TEST(Exact, NodeBudgetReturnsFeasibleIncumbent) {
  std::mt19937_64 rng(35);
  oracle::RandomShape shape;
  shape.min_bids = shape.max_bids = 15;
  for (int t = 0; t < 30; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, shape);
    const SolveResult r = exact(inst, ExactOptions{1e9, 3});
    EXPECT_TRUE(r.allocation.feasible);
    EXPECT_LE(r.welfare(), oracle::brute_force(inst));
    if (!r.proven_optimal) {
      EXPECT_GE(r.node_count, 3u);
    }
  }
}

TEST(Exact, RejectsNonPositiveTimeLimit) {
  const WdpInstance inst = gen_kstar({3, 0, 0, 0.1, 0, 0}).instance;
  EXPECT_THROW(exact(inst, 0.0), Error);
  EXPECT_THROW(exact(inst, -1.0), Error);
}

TEST(BruteForce, RefusesMoreThanTwentyFiveBids) {
  WdpInstance inst;
  inst.items = {{0, 1.0}};
  for (BidId i = 0; i < 26; ++i) inst.bids.push_back({i, 1.0, {0}, 1.0});
  try {
    brute_force(inst);
    FAIL() << "expected E_TOO_LARGE";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::too_large);
  }
  inst.bids.pop_back();
  EXPECT_EQ(brute_force(inst).welfare(), 1.0);
}

TEST(GreedyGap, KStarAndTrapValues) {
  for (std::size_t k = 2; k <= 10; ++k) {
    const WdpInstance inst = gen_kstar({k, 0, 0, 0.01, 0, 0}).instance;
    const double gap = greedy_gap(inst, exact(inst)).gap;
    EXPECT_EQ(gap, 1.0 - (1.0 + 0.01) / static_cast<double>(k));
  }
  const WdpInstance trap = gen_trap({3, 100, 40, 0, 0, 0}).instance;
  EXPECT_DOUBLE_EQ(greedy_gap(trap, exact(trap)).gap, 1.0 / 6.0);
}

TEST(GreedyGap, RequiresProvenOptimum) {
  const WdpInstance inst = gen_kstar({4, 0, 0, 0.01, 0, 0}).instance;
  SolveResult g = greedy(inst);
  try {
    greedy_gap(inst, g);
    FAIL() << "expected E_NOT_OPTIMAL";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_optimal);
  }
}

TEST(GreedyGap, ZeroOptimumGivesZeroGap) {
  EXPECT_EQ(relative_gap(0.0, 0.0), 0.0);
  EXPECT_EQ(relative_gap(2.0, 3.0), 0.0);
  EXPECT_EQ(relative_gap(2.0, 0.0), 1.0);
}

}  // namespace
}  // namespace wdp
