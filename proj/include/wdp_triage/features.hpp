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

// Twenty structural hardness features.
//
// Notation: d(e) is the number of bids requesting item e, u(e) the
// utilization sum_{b: e in E_b} c_b / C_e. "Used" items are those with
// d(e) >= 1.
//
//   #  name                   definition
//   1  cv_bid_density         std/mean of d(e) over used items
//   2  mean_bid_density       mean of d(e) over all items
//   3  max_bid_density        max of d(e)
//   4  std_bid_density        std of d(e) over all items
//   5  bottleneck_tightness   mean u(e) over the top ceil(25%) used items by u
//   6  value_congestion_corr  Pearson(v_i, mean of u(e) over E_i)
//   7  bid_value_mean
//   8  bid_value_std
//   9  bid_value_skew         m3 / m2^1.5
//  10  bid_value_kurtosis     m4 / m2^2 - 3
//  11  bid_cap_mean           mean of c_i
//  12  bid_cap_std
//  13  edge_util_mean         over used items
//  14  edge_util_std
//  15  edge_util_max
//  16  conflict_density       sum |E_i| / #used items
//  17  graph_density          n * mean|E_i| / m
//  18  bid_overlap_jaccard    mean |E_i & E_j| / |E_i | E_j| over bid pairs
//                             (all pairs up to 200, else 200 sampled pairs)
//  19  value_cap_ratio_mean   mean of v_i / c_i
//  20  value_cap_ratio_std

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "wdp_triage/core_model.hpp"
#include "wdp_triage/error.hpp"
#include "wdp_triage/stats.hpp"

namespace wdp {

inline constexpr std::size_t kNumFeatures = 20;

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "cv_bid_density",       "mean_bid_density",     "max_bid_density",
    "std_bid_density",      "bottleneck_tightness", "value_congestion_corr",
    "bid_value_mean",       "bid_value_std",        "bid_value_skew",
    "bid_value_kurtosis",   "bid_cap_mean",         "bid_cap_std",
    "edge_util_mean",       "edge_util_std",        "edge_util_max",
    "conflict_density",     "graph_density",        "bid_overlap_jaccard",
    "value_cap_ratio_mean", "value_cap_ratio_std",
};

struct FeatureVector {
  std::array<double, kNumFeatures> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  static constexpr const auto& names() { return kFeatureNames; }
};

struct FeatureGroup {
  std::string_view name;
  std::vector<std::size_t> columns;
};

/// The six feature families, in column order.
inline std::vector<FeatureGroup> feature_groups() {
  return {
      {"bid_density", {0, 1, 2, 3}},
      {"bottleneck_tightness", {4}},
      {"value_congestion_corr", {5}},
      {"bid_value_stats", {6, 7, 8, 9}},
      {"capacity_utilization", {10, 11, 12, 13, 14}},
      {"conflict_structure", {15, 16, 17, 18, 19}},
  };
}

inline constexpr std::size_t kJaccardPairBudget = 200;

namespace detail {

inline double jaccard(std::vector<std::uint32_t> a, std::vector<std::uint32_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

// Maps a linear index over unordered pairs (i < j) of n elements back to
// (i, j), rows enumerated as (0,1) (0,2) ... (1,2) ...
inline std::pair<std::size_t, std::size_t> unrank_pair(std::uint64_t r, std::size_t n) {
  std::size_t i = 0;
  std::uint64_t row = n - 1;
  while (r >= row) {
    r -= row;
    ++i;
    --row;
  }
  return {i, i + 1 + static_cast<std::size_t>(r)};
}

inline double mean_pairwise_jaccard(const WdpInstance& instance, const DenseInstance& dense) {
  const std::size_t n = dense.num_bids();
  if (n < 2) return 0.0;

  // Canonical bid order (value, demand, size, id) so that the sampled pairs
  // do not depend on how the bids happen to be listed.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dense.value[a] != dense.value[b]) return dense.value[a] < dense.value[b];
    if (dense.demand[a] != dense.demand[b]) return dense.demand[a] < dense.demand[b];
    if (dense.bid_items[a].size() != dense.bid_items[b].size())
      return dense.bid_items[a].size() < dense.bid_items[b].size();
    return instance.bids[a].id < instance.bids[b].id;
  });

  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  double total = 0.0;
  std::size_t used = 0;
  auto add = [&](std::size_t i, std::size_t j) {
    total += jaccard(dense.bid_items[order[i]], dense.bid_items[order[j]]);
    ++used;
  };
  if (pairs <= kJaccardPairBudget) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) add(i, j);
  } else {
    std::mt19937_64 rng(instance.seed);
    std::uniform_int_distribution<std::uint64_t> pick(0, pairs - 1);
    std::unordered_set<std::uint64_t> drawn;
    while (drawn.size() < kJaccardPairBudget) {
      const std::uint64_t r = pick(rng);
      if (!drawn.insert(r).second) continue;
      auto [i, j] = unrank_pair(r, n);
      add(i, j);
    }
  }
  return total / static_cast<double>(used);
}

inline std::vector<double> bid_counts(const DenseInstance& dense) {
  std::vector<double> counts(dense.num_items(), 0.0);
  for (const auto& items : dense.bid_items)
    for (auto e : items) counts[e] += 1.0;
  return counts;
}

inline double used_density_cv(const std::vector<double>& counts) {
  std::vector<double> used;
  for (double d : counts)
    if (d > 0.0) used.push_back(d);
  return stats::cv(used);
}

}  // namespace detail

inline FeatureVector extract(const WdpInstance& instance) {
  if (instance.bids.empty()) fail(ErrorCode::invalid_instance, "cannot extract features: no bids");
  require_valid(instance);
  const DenseInstance dense = densify(instance);
  const std::size_t n = dense.num_bids();
  const std::size_t m = dense.num_items();

  const std::vector<double> counts = detail::bid_counts(dense);
  std::vector<double> load(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (auto e : dense.bid_items[i]) load[e] += dense.demand[i];

  std::vector<double> util(m, 0.0);
  std::vector<std::size_t> used;
  std::vector<double> used_counts, used_util;
  for (std::size_t e = 0; e < m; ++e) {
    util[e] = load[e] / dense.capacity[e];
    if (counts[e] > 0.0) {
      used.push_back(e);
      used_counts.push_back(counts[e]);
      used_util.push_back(util[e]);
    }
  }

  FeatureVector f;
  const stats::Moments all_density = stats::moments(counts);
  f[0] = stats::cv(used_counts);
  f[1] = all_density.mean;
  f[2] = stats::max(counts);
  f[3] = all_density.stddev;

  {
    std::vector<std::size_t> by_util = used;
    std::stable_sort(by_util.begin(), by_util.end(),
                     [&](std::size_t a, std::size_t b) { return util[a] > util[b]; });
    const std::size_t top = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(0.25 * static_cast<double>(used.size()))));
    double sum = 0.0;
    for (std::size_t t = 0; t < top; ++t) sum += util[by_util[t]];
    f[4] = sum / static_cast<double>(top);
  }

  std::vector<double> congestion(n), ratio(n), sizes(n);
  double incidences = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (auto e : dense.bid_items[i]) s += util[e];
    sizes[i] = static_cast<double>(dense.bid_items[i].size());
    congestion[i] = s / sizes[i];
    ratio[i] = dense.value[i] / dense.demand[i];
    incidences += sizes[i];
  }
  f[5] = stats::pearson(dense.value, congestion);

  const stats::Moments value = stats::moments(dense.value);
  f[6] = value.mean;
  f[7] = value.stddev;
  f[8] = value.skewness;
  f[9] = value.kurtosis;

  const stats::Moments demand = stats::moments(dense.demand);
  f[10] = demand.mean;
  f[11] = demand.stddev;

  const stats::Moments utilization = stats::moments(used_util);
  f[12] = utilization.mean;
  f[13] = utilization.stddev;
  f[14] = stats::max(used_util);

  f[15] = used.empty() ? 0.0 : incidences / static_cast<double>(used.size());
  f[16] = incidences / static_cast<double>(m);
  f[17] = detail::mean_pairwise_jaccard(instance, dense);

  const stats::Moments vc = stats::moments(ratio);
  f[18] = vc.mean;
  f[19] = vc.stddev;
  return f;
}

/// Coefficient of variation of per-item bid counts over used items
/// (feature #1), without computing the rest of the vector.
inline double bid_density_cv(const WdpInstance& instance) {
  require_valid(instance);
  return detail::used_density_cv(detail::bid_counts(densify(instance)));
}

}  // namespace wdp
