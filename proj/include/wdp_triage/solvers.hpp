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

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "wdp_triage/core_model.hpp"
#include "wdp_triage/error.hpp"

namespace wdp {

struct SolveResult {
  Allocation allocation;
  std::string solver;
  double wall_time = 0.0;  // seconds
  std::uint64_t node_count = 0;
  bool proven_optimal = false;

  double welfare() const { return allocation.welfare; }
};

struct GapReport {
  double gap = 0.0;
  double optimal_welfare = 0.0;
  double heuristic_welfare = 0.0;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline bool fits(const DenseInstance& dense, const std::vector<double>& load, std::size_t bid) {
  for (auto e : dense.bid_items[bid])
    if (load[e] + dense.demand[bid] > dense.capacity[e] + kCapacityTolerance) return false;
  return true;
}

inline void add_load(const DenseInstance& dense, std::vector<double>& load, std::size_t bid,
                     double sign) {
  for (auto e : dense.bid_items[bid]) load[e] += sign * dense.demand[bid];
}

}  // namespace detail

/// Relative shortfall 1 - heuristic/optimal, clamped to [0, 1]. Zero when
/// the optimum is not positive.
inline double relative_gap(double optimal, double heuristic) {
  if (!(optimal > 0.0)) return 0.0;
  return std::clamp(1.0 - heuristic / optimal, 0.0, 1.0);
}

/// Greedy-by-value: scan bids by decreasing value (ties by ascending bid
/// id) and accept each one whose demand still fits on all its items.
inline SolveResult greedy(const WdpInstance& instance) {
  require_valid(instance);
  detail::Stopwatch clock;
  const DenseInstance dense = densify(instance);

  std::vector<std::size_t> order(dense.num_bids());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dense.value[a] != dense.value[b]) return dense.value[a] > dense.value[b];
    return instance.bids[a].id < instance.bids[b].id;
  });

  std::vector<double> load(dense.num_items(), 0.0);
  std::vector<bool> accepted(dense.num_bids(), false);
  for (auto i : order) {
    if (!detail::fits(dense, load, i)) continue;
    detail::add_load(dense, load, i, 1.0);
    accepted[i] = true;
  }

  SolveResult result;
  result.allocation = make_allocation(instance, std::move(accepted));
  result.solver = "greedy";
  result.wall_time = clock.seconds();
  return result;
}

struct ExactOptions {
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  std::uint64_t node_limit = 0;                                 // 0 = unlimited
};

namespace detail {

// Groups bids that are connected through shared items. Components come out
// ordered by their lowest bid index.
inline std::vector<std::vector<std::size_t>> conflict_components(const DenseInstance& dense) {
  std::vector<std::size_t> parent(dense.num_bids());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::size_t> owner(dense.num_items(), dense.num_bids());
  for (std::size_t i = 0; i < dense.num_bids(); ++i)
    for (auto e : dense.bid_items[i]) {
      if (owner[e] == dense.num_bids()) {
        owner[e] = i;
      } else {
        const std::size_t a = find(owner[e]), b = find(i);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> slot(dense.num_bids(), dense.num_bids());
  for (std::size_t i = 0; i < dense.num_bids(); ++i) {
    const std::size_t root = find(i);
    if (slot[root] == dense.num_bids()) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(i);
  }
  return components;
}

class BranchAndBound {
 public:
  BranchAndBound(const WdpInstance& instance, const DenseInstance& dense, ExactOptions options)
      : instance_(instance), dense_(dense), options_(options), load_(dense.num_items(), 0.0),
        chosen_(dense.num_bids(), false), best_(dense.num_bids(), false) {}

  void run() {
    for (auto& component : conflict_components(dense_)) {
      std::sort(component.begin(), component.end(), [&](std::size_t a, std::size_t b) {
        const double ra = dense_.value[a] / dense_.demand[a];
        const double rb = dense_.value[b] / dense_.demand[b];
        if (ra != rb) return ra > rb;
        return instance_.bids[a].id < instance_.bids[b].id;
      });
      if (aborted_) {
        // Budget gone: take the first leaf of the search (ratio order, accept
        // when it fits) so the incumbent still covers this component.
        for (auto bid : component)
          if (fits(dense_, load_, bid)) {
            add_load(dense_, load_, bid, 1.0);
            best_[bid] = true;
          }
        continue;
      }
      order_ = std::move(component);
      incumbent_ = 0.0;
      search(0, 0.0);
      for (auto bid : order_)
        if (best_[bid]) add_load(dense_, load_, bid, 1.0);
    }
  }

  const std::vector<bool>& best() const { return best_; }
  std::uint64_t nodes() const { return nodes_; }
  bool completed() const { return !aborted_; }

 private:
  // Sum of values of the remaining bids that each fit on their own against
  // the current residual capacity.
  double bound(std::size_t depth, double welfare) const {
    double total = welfare;
    for (std::size_t d = depth; d < order_.size(); ++d)
      if (fits(dense_, load_, order_[d])) total += dense_.value[order_[d]];
    return total;
  }

  bool out_of_budget() {
    if (options_.node_limit != 0 && nodes_ >= options_.node_limit) return true;
    if ((nodes_ & 63u) == 0 && std::isfinite(options_.time_limit) &&
        clock_.seconds() >= options_.time_limit)
      return true;
    return false;
  }

  void record() {
    for (auto bid : order_) best_[bid] = chosen_[bid];
  }

  void search(std::size_t depth, double welfare) {
    if (aborted_) return;
    ++nodes_;
    if (welfare > incumbent_) {
      incumbent_ = welfare;
      record();
    }
    if (depth == order_.size()) return;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    if (bound(depth, welfare) <= incumbent_) return;

    const std::size_t bid = order_[depth];
    if (fits(dense_, load_, bid)) {
      add_load(dense_, load_, bid, 1.0);
      chosen_[bid] = true;
      search(depth + 1, welfare + dense_.value[bid]);
      chosen_[bid] = false;
      add_load(dense_, load_, bid, -1.0);
    }
    search(depth + 1, welfare);
  }

  const WdpInstance& instance_;
  const DenseInstance& dense_;
  ExactOptions options_;
  Stopwatch clock_;
  std::vector<std::size_t> order_;
  std::vector<double> load_;
  std::vector<bool> chosen_;
  std::vector<bool> best_;
  double incumbent_ = 0.0;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace detail

/// Depth-first branch-and-bound over bids sorted by decreasing v_i / c_i,
/// include branch first. Bids that share no item (even transitively) never
/// interact, so each connected component of the conflict structure is
/// searched on its own. When the budget runs out the incumbent is returned
/// with proven_optimal = false.
inline SolveResult exact(const WdpInstance& instance, ExactOptions options) {
  if (!(options.time_limit > 0.0))
    fail(ErrorCode::invalid_argument, "exact solver time limit must be positive");
  require_valid(instance);
  detail::Stopwatch clock;
  const DenseInstance dense = densify(instance);
  detail::BranchAndBound search(instance, dense, options);
  search.run();

  SolveResult result;
  result.allocation = make_allocation(instance, search.best());
  result.solver = "exact";
  result.node_count = search.nodes();
  result.proven_optimal = search.completed();
  result.wall_time = clock.seconds();
  return result;
}

inline SolveResult exact(const WdpInstance& instance,
                         double time_limit = std::numeric_limits<double>::infinity()) {
  return exact(instance, ExactOptions{time_limit, 0});
}

inline constexpr std::size_t kBruteForceMaxBids = 25;

/// Enumerates all 2^n acceptance vectors. Test oracle; refuses n > 25.
inline SolveResult brute_force(const WdpInstance& instance) {
  require_valid(instance);
  const std::size_t n = instance.bids.size();
  if (n > kBruteForceMaxBids)
    fail(ErrorCode::too_large, "brute force refuses " + std::to_string(n) + " bids (max " +
                                   std::to_string(kBruteForceMaxBids) + ")");
  detail::Stopwatch clock;
  const DenseInstance dense = densify(instance);

  std::uint64_t best_mask = 0;
  double best_welfare = 0.0;
  std::vector<double> load(dense.num_items());
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::fill(load.begin(), load.end(), 0.0);
    double welfare = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      welfare += dense.value[i];
      for (auto e : dense.bid_items[i]) {
        load[e] += dense.demand[i];
        if (load[e] > dense.capacity[e] + kCapacityTolerance) ok = false;
      }
    }
    if (ok && welfare > best_welfare) {
      best_welfare = welfare;
      best_mask = mask;
    }
  }

  std::vector<bool> accepted(n);
  for (std::size_t i = 0; i < n; ++i) accepted[i] = (best_mask >> i & 1u) != 0;
  SolveResult result;
  result.allocation = make_allocation(instance, std::move(accepted));
  result.solver = "brute_force";
  result.node_count = count;
  result.proven_optimal = true;
  result.wall_time = clock.seconds();
  return result;
}

/// Greedy shortfall against a proven optimum.
inline GapReport greedy_gap(const WdpInstance& instance, const SolveResult& reference) {
  if (!reference.proven_optimal)
    fail(ErrorCode::not_optimal, "greedy_gap needs a proven-optimal reference solution");
  GapReport report;
  report.optimal_welfare = reference.welfare();
  report.heuristic_welfare = greedy(instance).welfare();
  report.gap = relative_gap(report.optimal_welfare, report.heuristic_welfare);
  return report;
}

}  // namespace wdp
