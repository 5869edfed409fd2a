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
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wdp_triage/features.hpp"
#include "wdp_triage/generators.hpp"

namespace wdp {
namespace {

void expect_close(const FeatureVector& got, const std::array<double, kNumFeatures>& want,
                  double tol) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    EXPECT_NEAR(got[i], want[i], tol * std::max(1.0, std::fabs(want[i]))) << kFeatureNames[i];
}

TEST(Features, NamesAreUniqueAndGroupsPartitionColumns) {
  std::set<std::string_view> names(kFeatureNames.begin(), kFeatureNames.end());
  EXPECT_EQ(names.size(), kNumFeatures);
  std::vector<std::size_t> cols;
  for (const auto& g : feature_groups()) cols.insert(cols.end(), g.columns.begin(), g.columns.end());
  std::sort(cols.begin(), cols.end());
  for (std::size_t i = 0; i < kNumFeatures; ++i) EXPECT_EQ(cols[i], i);
}

TEST(Features, MatchOracleOnSmallInstances) {
  std::mt19937_64 rng(41);
  oracle::RandomShape shape;
  shape.min_bids = 2;
  shape.max_bids = 8;
  for (int t = 0; t < 300; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, shape);
    expect_close(extract(inst), oracle::features(inst), 1e-9);
  }
}

TEST(Features, MatchOracleOnTrapsWithAllPairs) {
  for (std::size_t k = 2; k <= 19; ++k)
    expect_close(extract(gen_trap({k, 40.0 + k, 40.0, 0, 2 * k, 0}).instance),
                 oracle::features(gen_trap({k, 40.0 + k, 40.0, 0, 2 * k, 0}).instance), 1e-9);
}

TEST(Features, KStarFourValues) {
  const FeatureVector f = extract(gen_kstar({4, 0, 0, 0.5, 0, 0}).instance);
  // every item carries the whale and one fish
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 2.0);
  EXPECT_EQ(f[2], 2.0);
  EXPECT_EQ(f[4], 2.0);
  EXPECT_EQ(f[6], (1.5 + 4.0) / 5.0);
  EXPECT_EQ(f[15], 2.0);
  EXPECT_EQ(f[16], 2.0);
  // whale-fish pairs have Jaccard 1/4, fish-fish pairs 0
  EXPECT_DOUBLE_EQ(f[17], 4 * 0.25 / 10.0);
}

TEST(Features, BidDensityCvExamples) {
  WdpInstance inst;
  inst.items = {{0, 3.0}, {1, 3.0}, {2, 3.0}};
  inst.bids = {{0, 1, {0, 1}, 1}, {1, 1, {1}, 1}, {2, 1, {1}, 1}};
  // counts over used items {1, 3}: sd 1, mean 2; item 2 unused
  EXPECT_DOUBLE_EQ(bid_density_cv(inst), 0.5);
  EXPECT_DOUBLE_EQ(extract(inst)[0], 0.5);
  inst.bids = {{0, 1, {0}, 1}, {1, 1, {1}, 1}};
  EXPECT_EQ(bid_density_cv(inst), 0.0);
}

TEST(Features, ValueMomentsScaleWithValues) {
  std::mt19937_64 rng(42);
  oracle::RandomShape shape;
  shape.min_bids = 5;
  for (int t = 0; t < 50; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, shape);
    WdpInstance scaled = inst;
    for (auto& b : scaled.bids) b.value *= 4.0;
    const FeatureVector a = extract(inst), b = extract(scaled);
    for (std::size_t i : {6, 7, 18, 19}) EXPECT_NEAR(b[i], 4.0 * a[i], 1e-9 * std::fabs(b[i]) + 1e-12);
    for (std::size_t i : {0, 1, 2, 3, 4, 5, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17})
      EXPECT_NEAR(b[i], a[i], 1e-9 * std::max(1.0, std::fabs(a[i])));
  }
}

TEST(Features, CapacityScalingOnlyMovesUtilization) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 50; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, {});
    WdpInstance roomy = inst;
    for (auto& item : roomy.items) item.capacity *= 2.0;
    const FeatureVector a = extract(inst), b = extract(roomy);
    for (std::size_t i : {4, 12, 13, 14}) EXPECT_NEAR(b[i], 0.5 * a[i], 1e-12 * (1 + a[i]));
    for (std::size_t i : {0, 1, 2, 3, 6, 7, 8, 9, 10, 11, 15, 16, 17, 18, 19}) EXPECT_EQ(b[i], a[i]);
  }
}

TEST(Features, InvariantUnderReordering) {
  std::mt19937_64 rng(44);
  oracle::RandomShape shape;
  shape.min_bids = 25;
  shape.max_bids = 40;  // beyond the all-pairs limit, so Jaccard is sampled
  for (int t = 0; t < 40; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, shape);
    WdpInstance shuffled = inst;
    std::shuffle(shuffled.bids.begin(), shuffled.bids.end(), rng);
    std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
    for (auto& b : shuffled.bids) std::shuffle(b.items.begin(), b.items.end(), rng);
    const FeatureVector a = extract(inst), b = extract(shuffled);
    for (std::size_t i = 0; i < kNumFeatures; ++i)
      EXPECT_NEAR(a[i], b[i], 1e-9 * std::max(1.0, std::fabs(a[i]))) << kFeatureNames[i];
  }
}

TEST(Features, SampledJaccardStaysCloseToExhaustive) {
  std::mt19937_64 rng(45);
  oracle::RandomShape shape;
  shape.min_bids = shape.max_bids = 60;
  shape.min_items = shape.max_items = 12;
  for (int t = 0; t < 10; ++t) {
    const WdpInstance inst = oracle::random_instance(rng, shape);
    const double sampled = extract(inst)[17];
    EXPECT_NEAR(sampled, oracle::features(inst)[17], 0.05);
    EXPECT_EQ(sampled, extract(inst)[17]);
  }
}

TEST(Features, FiniteOnAssortedInstances) {
  std::mt19937_64 rng(46);
  oracle::RandomShape shape;
  shape.min_bids = 1;
  shape.max_bids = 30;
  shape.min_items = 1;
  shape.max_items = 40;
  shape.max_bundle = 6;
  for (int t = 0; t < 500; ++t) {
    shape.unit = t % 2 == 0;
    const FeatureVector f = extract(oracle::random_instance(rng, shape));
    for (std::size_t i = 0; i < kNumFeatures; ++i) ASSERT_TRUE(std::isfinite(f[i]));
  }
  MixConfig c;
  c.num_hard = c.num_easy = 20;
  for (const auto& t : gen_mixed(c)) {
    const FeatureVector f = extract(t.instance);
    for (std::size_t i = 0; i < kNumFeatures; ++i) ASSERT_TRUE(std::isfinite(f[i]));
  }
}

TEST(Features, SingleBidIsDegenerateButFinite) {
  WdpInstance inst;
  inst.items = {{0, 2.0}, {1, 2.0}};
  inst.bids = {{0, 7.0, {0}, 1.0}};
  const FeatureVector f = extract(inst);
  EXPECT_EQ(f[5], 0.0);
  EXPECT_EQ(f[7], 0.0);
  EXPECT_EQ(f[8], 0.0);
  EXPECT_EQ(f[9], 0.0);
  EXPECT_EQ(f[17], 0.0);
  EXPECT_EQ(f[2], 1.0);
  EXPECT_EQ(f[3], 0.5);
}

TEST(Features, RejectsInvalidInstances) {
  WdpInstance inst;
  inst.items = {{0, 1.0}};
  EXPECT_THROW(extract(inst), Error);
  inst.bids = {{0, 1.0, {5}, 1.0}};
  EXPECT_THROW(extract(inst), Error);
}

}  // namespace
}  // namespace wdp
