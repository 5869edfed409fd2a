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
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wdp_triage/dataset.hpp"
#include "wdp_triage/generators.hpp"
#include "wdp_triage/io.hpp"
#include "wdp_triage/solvers.hpp"

namespace wdp {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TEST(KStar, RatioForKFiveEpsilonHundredth) {
  const auto g = gen_kstar({5, 0, 0, 0.01, 0, 0});
  EXPECT_DOUBLE_EQ(g.certificate.greedy_welfare, 1.01);
  EXPECT_EQ(g.certificate.optimal_welfare, 5.0);
  EXPECT_NEAR(g.certificate.analytic_ratio, 0.202, 1e-15);
}

TEST(KStar, TieAtZeroEpsilonGoesToWhale) {
  const auto g = gen_kstar({2, 0, 0, 0.0, 0, 0});
  EXPECT_EQ(g.certificate.analytic_ratio, 0.5);
  const SolveResult r = greedy(g.instance);
  EXPECT_TRUE(r.allocation.accepted[0]);
  EXPECT_EQ(r.welfare(), 1.0);
}

TEST(KStar, SixItemsThreeFish) {
  const auto g = gen_kstar({3, 0, 0, 0.5, 6, 0});
  ASSERT_EQ(g.instance.num_items(), 6u);
  ASSERT_EQ(g.instance.num_bids(), 4u);
  EXPECT_EQ(g.instance.bids[0].items.size(), 6u);
  for (std::size_t f = 1; f <= 3; ++f) EXPECT_EQ(g.instance.bids[f].items.size(), 2u);
  EXPECT_EQ(oracle::brute_force(g.instance), 3.0);
  EXPECT_EQ(exact(g.instance).welfare(), 3.0);
}

TEST(KStar, FishPartitionIsDisjointAndNearEqual) {
  for (std::size_t k = 2; k <= 7; ++k)
    for (std::size_t m = k; m <= 3 * k + 1; ++m) {
      const auto g = gen_kstar({k, 0, 0, 0.1, m, 0});
      std::set<ItemId> covered;
      std::size_t lo = m, hi = 0;
      for (std::size_t f = 1; f <= k; ++f) {
        const auto& items = g.instance.bids[f].items;
        lo = std::min(lo, items.size());
        hi = std::max(hi, items.size());
        for (auto e : items) EXPECT_TRUE(covered.insert(e).second);
      }
      EXPECT_EQ(covered.size(), m);
      EXPECT_LE(hi - lo, 1u);
    }
}

TEST(KStar, RejectsTooFewItems) {
  EXPECT_THROW(gen_kstar({4, 0, 0, 0.1, 3, 0}), Error);
  EXPECT_THROW(gen_kstar({1, 0, 0, 0.1, 0, 0}), Error);
  EXPECT_THROW(gen_kstar({3, 0, 0, -0.1, 0, 0}), Error);
}

TEST(Trap, FigureOneValues) {
  const auto g = gen_trap({3, 100, 40, 0, 0, 0});
  EXPECT_EQ(g.certificate.optimal_welfare, 120.0);
  EXPECT_EQ(g.certificate.greedy_welfare, 100.0);
  const SolveResult opt = exact(g.instance);
  EXPECT_DOUBLE_EQ(greedy_gap(g.instance, opt).gap, 1.0 / 6.0);
}

TEST(Trap, NarrowWhaleApproachesHalfGap) {
  const double vf = 10.0, delta = 1.0 / 1024;
  const auto g = gen_trap({2, vf + delta, vf, 0, 0, 0});
  const double gap = 1.0 - g.certificate.analytic_ratio;
  EXPECT_NEAR(gap, (vf - delta) / (2 * vf), 1e-15);
}

TEST(Trap, CertificateMatchesSolvers) {
  for (std::size_t k = 2; k <= 12; ++k) {
    const double vf = 7.25;
    const double vw = vf * (1.0 + 0.5 * static_cast<double>(k - 1));
    const auto g = gen_trap({k, vw, vf, 0, 2 * k + 1, 0});
    EXPECT_EQ(greedy(g.instance).welfare(), g.certificate.greedy_welfare);
    EXPECT_EQ(exact(g.instance).welfare(), g.certificate.optimal_welfare);
    EXPECT_EQ(oracle::brute_force(g.instance), g.certificate.optimal_welfare);
  }
}

TEST(Trap, RejectsOutOfOrderValues) {
  EXPECT_THROW(gen_trap({3, 40, 40, 0, 0, 0}), Error);   // v_w == v_f
  EXPECT_THROW(gen_trap({3, 120, 40, 0, 0, 0}), Error);  // k v_f == v_w
  EXPECT_THROW(gen_trap({3, 30, 40, 0, 0, 0}), Error);
}

TEST(StarMis, Examples) {
  const MwisInstance five = gen_star_trap_mis(5, 1.01, 1.0);
  EXPECT_EQ(oracle::mwis(five.weights, five.edges), 5.0);
  EXPECT_DOUBLE_EQ(greedy(mwis_to_wdp(five)).welfare(), 1.01);
  const MwisInstance two = gen_star_trap_mis(2, 3.0, 1.0);
  EXPECT_EQ(oracle::mwis(two.weights, two.edges), 3.0);
  EXPECT_EQ(exact(mwis_to_wdp(two)).welfare(), 3.0);
}

MixConfig small_mix(std::uint64_t seed) {
  MixConfig c;
  c.num_hard = 60;
  c.num_easy = 60;
  c.seed = seed;
  return c;
}

TEST(Mixed, FillerOnlyIsNearlyGreedyOptimal) {
  MixConfig c = small_mix(21);
  c.num_easy = 0;
  c.num_hard = 400;
  c.traps_min = c.traps_max = 0;
  const auto labeled = label_with_exact(gen_mixed(c));
  const auto small = std::count_if(labeled.begin(), labeled.end(),
                                   [](const LabeledInstance& l) { return l.greedy_gap <= 0.05; });
  EXPECT_GE(static_cast<double>(small), 0.95 * static_cast<double>(labeled.size()));
}

TEST(Mixed, ThreeTrapsWithoutFillerFollowTheCertificate) {
  MixConfig c = small_mix(22);
  c.num_easy = 0;
  c.filler_bids_min = c.filler_bids_max = 0;
  for (const auto& t : gen_mixed(c)) {
    ASSERT_TRUE(t.certificate.has_value());
    const SolveResult opt = exact(t.instance);
    const SolveResult g = greedy(t.instance);
    EXPECT_EQ(opt.welfare(), t.certificate->optimal_welfare);
    EXPECT_EQ(g.welfare(), t.certificate->greedy_welfare);
    EXPECT_EQ(greedy_gap(t.instance, opt).gap,
              1.0 - t.certificate->greedy_welfare / t.certificate->optimal_welfare);
  }
}

TEST(Mixed, TrapCountAndShape) {
  MixConfig c = small_mix(23);
  c.num_easy = 0;
  c.filler_bids_min = c.filler_bids_max = 0;
  for (const auto& t : gen_mixed(c)) {
    const MwisInstance g = conflict_graph(t.instance);
    std::vector<std::size_t> degree(g.num_nodes());
    for (auto [a, b] : g.edges) {
      ++degree[a];
      ++degree[b];
    }
    const auto whales = std::count_if(degree.begin(), degree.end(), [](auto d) { return d > 1; });
    EXPECT_EQ(whales, 3);
    EXPECT_EQ(g.edges.size(), t.instance.num_bids() - 3);
  }
}

TEST(Mixed, EasyBidsRequestOneToFourItems) {
  MixConfig c = small_mix(24);
  c.num_hard = 0;
  std::set<std::size_t> sizes;
  for (const auto& t : gen_mixed(c)) {
    EXPECT_EQ(t.tag, InstanceTag::easy);
    EXPECT_EQ(t.instance.num_bids(), c.easy_bids);
    EXPECT_EQ(t.instance.num_items(), c.easy_items);
    for (const auto& b : t.instance.bids) {
      sizes.insert(b.items.size());
      EXPECT_GE(b.value, c.filler_value_min - 1.0 / 1024);
      EXPECT_LE(b.value, c.filler_value_max + 1.0 / 1024);
    }
  }
  EXPECT_EQ(sizes, (std::set<std::size_t>{1, 2, 3, 4}));
}

TEST(Mixed, SeedGivesIdenticalJson) {
  auto dump_all = [](const std::vector<TaggedInstance>& v) {
    std::string s;
    for (const auto& t : v) s += io::dump(io::to_json(t.instance));
    return s;
  };
  const std::string a = dump_all(gen_mixed(small_mix(5)));
  const std::string b = dump_all(gen_mixed(small_mix(5)));
  const std::string c = dump_all(gen_mixed(small_mix(6)));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Mixed, HardGapsDominateEasyGaps) {
  const auto labeled = label_with_exact(gen_mixed(small_mix(25)));
  std::vector<double> hard, easy;
  for (const auto& l : labeled) (l.tag == InstanceTag::hard ? hard : easy).push_back(l.greedy_gap);
  ASSERT_GE(hard.size() + easy.size(), 100u);
  EXPECT_GT(median(hard), 3.0 * median(easy));
}

TEST(Mixed, PoolTooSmallIsAnError) {
  MixConfig c = small_mix(1);
  c.hard_item_pool = 5;
  EXPECT_THROW(gen_mixed(c), Error);
}

TEST(Mixed, RejectsInvalidRanges) {
  MixConfig c = small_mix(1);
  c.k_min = 1;
  EXPECT_THROW(gen_mixed(c), Error);
  c = small_mix(1);
  c.whale_position_max = 1.0;
  EXPECT_THROW(gen_mixed(c), Error);
  c = small_mix(1);
  c.filler_value_min = 0;
  EXPECT_THROW(gen_mixed(c), Error);
  c = small_mix(1);
  c.easy_max_bundle = c.easy_items + 1;
  EXPECT_THROW(gen_mixed(c), Error);
}

TEST(Mixed, ValueScaleLeavesGapsUnchanged) {
  MixConfig a = small_mix(26), b = small_mix(26);
  a.num_hard = b.num_hard = 20;
  a.num_easy = b.num_easy = 20;
  b.value_scale_min = b.value_scale_max = 8.0;  // powers of two keep the grid exact
  const auto la = label_with_exact(gen_mixed(a));
  const auto lb = label_with_exact(gen_mixed(b));
  for (std::size_t i = 0; i < la.size(); ++i) EXPECT_NEAR(la[i].greedy_gap, lb[i].greedy_gap, 1e-3);
}

}  // namespace
}  // namespace wdp
