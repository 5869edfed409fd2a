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

// Instance generators.
//
// A whale-fish trap is one whale bid requesting every trap item plus k fish
// bids that split those items into disjoint blocks. With
// v_f < v_w < k * v_f, greedy-by-value takes the whale (which blocks every
// fish) while the optimum takes all fish, so greedy welfare is exactly v_w
// and the optimum exactly k * v_f. The k-star family is the special case
// v_w = 1 + eps, v_f = 1 with ratio (1 + eps) / k.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wdp_triage/core_model.hpp"
#include "wdp_triage/error.hpp"

namespace wdp {

struct TrapConfig {
  std::size_t k = 3;
  double whale_value = 100.0;
  double fish_value = 40.0;
  double epsilon = 0.0;    // k-star only: whale value is 1 + epsilon
  std::size_t m_trap = 0;  // 0 selects k items (one per fish)
  std::uint64_t seed = 0;

  std::size_t trap_items() const { return m_trap == 0 ? k : m_trap; }
};

struct Certificate {
  double greedy_welfare = 0.0;
  double optimal_welfare = 0.0;
  double analytic_ratio = 0.0;
};

struct GeneratedTrap {
  WdpInstance instance;
  Certificate certificate;
};

enum class InstanceTag { hard, easy };

inline std::string_view to_string(InstanceTag tag) {
  return tag == InstanceTag::hard ? "hard" : "easy";
}

inline InstanceTag parse_tag(std::string_view text) {
  if (text == "hard") return InstanceTag::hard;
  if (text == "easy") return InstanceTag::easy;
  fail(ErrorCode::parse_error, "unknown instance tag '" + std::string(text) + "'");
}

/// Generator output before exact labelling. `certificate` is set when the
/// greedy and optimal welfare are known analytically (traps without filler).
struct TaggedInstance {
  WdpInstance instance;
  InstanceTag tag = InstanceTag::easy;
  std::optional<Certificate> certificate;
};

struct MixConfig {
  std::size_t num_hard = 50;
  std::size_t num_easy = 50;

  // hard instances
  // trap count per instance, uniform in [traps_min, traps_max]
  std::size_t traps_min = 3;
  std::size_t traps_max = 3;
  std::size_t k_min = 2;
  std::size_t k_max = 6;
  std::size_t items_per_fish = 3;
  double fish_value_min = 30.0;
  double fish_value_max = 55.0;
  // v_w = v_f * (1 + r * (k - 1)) with r uniform in [whale_position_min, whale_position_max]
  double whale_position_min = 0.15;
  double whale_position_max = 0.85;
  // filler bid count per instance, uniform in [filler_bids_min, filler_bids_max]
  std::size_t filler_bids_min = 4;
  std::size_t filler_bids_max = 4;
  double filler_value_min = 2.0;
  double filler_value_max = 20.0;
  std::size_t hard_item_pool = 0;  // 0 sizes the pool to fit traps and filler exactly

  // easy instances (values drawn from the filler range)
  std::size_t easy_bids = 60;
  std::size_t easy_items = 240;
  std::size_t easy_max_bundle = 4;

  // Every value of an instance is multiplied by a factor drawn log-uniformly
  // from [value_scale_min, value_scale_max]. Gaps do not depend on it.
  double value_scale_min = 1.0;
  double value_scale_max = 1.0;

  std::uint64_t seed = 0;
};

namespace detail {

// Generator values live on a 1/1024 grid so that welfare sums are exact.
inline double quantize(double value) {
  return std::max(1.0 / 1024.0, std::round(value * 1024.0) / 1024.0);
}

inline double draw_scale(const MixConfig& c, std::mt19937_64& rng) {
  if (c.value_scale_max == c.value_scale_min) return c.value_scale_min;
  std::uniform_real_distribution<double> u(std::log(c.value_scale_min),
                                           std::log(c.value_scale_max));
  return std::exp(u(rng));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

struct TrapCursor {
  ItemId next_item = 0;
  BidId next_bid = 0;
};

// Appends one whale and k fish over `m` fresh items, assigned round-robin.
// Returns {whale welfare, fish welfare summed in bid order}.
inline std::pair<double, double> append_trap(WdpInstance& instance, TrapCursor& cursor,
                                             std::size_t k, double whale, double fish,
                                             std::size_t m) {
  const ItemId first = cursor.next_item;
  for (std::size_t j = 0; j < m; ++j) instance.items.push_back({cursor.next_item++, 1.0});

  Bid whale_bid{cursor.next_bid++, whale, {}, 1.0};
  for (std::size_t j = 0; j < m; ++j) whale_bid.items.push_back(first + static_cast<ItemId>(j));
  instance.bids.push_back(std::move(whale_bid));

  double fish_total = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    Bid fish_bid{cursor.next_bid++, fish, {}, 1.0};
    for (std::size_t j = f; j < m; j += k) fish_bid.items.push_back(first + static_cast<ItemId>(j));
    instance.bids.push_back(std::move(fish_bid));
    fish_total += fish;
  }
  return {whale, fish_total};
}

// Kept out of line: GCC 11 folds `2 * k < k` to true once a caller's
// m_trap = 2 * k is inlined into this comparison.
[[gnu::noinline]] inline void check_trap_shape(const TrapConfig& config) {
  if (config.k < 2) fail(ErrorCode::invalid_config, "trap needs k >= 2 fish");
  const std::size_t m = config.trap_items();
  if (m < config.k)
    fail(ErrorCode::invalid_config, "m_trap = " + std::to_string(m) +
                                        " items cannot be split among k = " +
                                        std::to_string(config.k) + " fish");
}

}  // namespace detail

/// Canonical k-star instance: whale value 1 + epsilon, unit fish, unit
/// capacities and demands. The whale is bid 0.
inline GeneratedTrap gen_kstar(const TrapConfig& config) {
  detail::check_trap_shape(config);
  if (!(config.epsilon >= 0.0) || !std::isfinite(config.epsilon))
    fail(ErrorCode::invalid_config, "k-star epsilon must be finite and >= 0");

  GeneratedTrap out;
  out.instance.name = "kstar_k" + std::to_string(config.k);
  out.instance.seed = config.seed;
  detail::TrapCursor cursor;
  auto [greedy, optimal] = detail::append_trap(out.instance, cursor, config.k,
                                               1.0 + config.epsilon, 1.0, config.trap_items());
  out.certificate = {greedy, optimal, (1.0 + config.epsilon) / static_cast<double>(config.k)};
  return out;
}

/// Single whale-fish trap with general values; requires k*v_f > v_w > v_f.
inline GeneratedTrap gen_trap(const TrapConfig& config) {
  detail::check_trap_shape(config);
  const double k = static_cast<double>(config.k);
  if (!(config.fish_value > 0.0) || !(config.whale_value > config.fish_value) ||
      !(k * config.fish_value > config.whale_value))
    fail(ErrorCode::invalid_config, "trap values must satisfy k*v_f > v_w > v_f > 0");

  GeneratedTrap out;
  out.instance.name = "trap_k" + std::to_string(config.k);
  out.instance.seed = config.seed;
  detail::TrapCursor cursor;
  auto [greedy, optimal] = detail::append_trap(out.instance, cursor, config.k, config.whale_value,
                                               config.fish_value, config.trap_items());
  out.certificate = {greedy, optimal, greedy / optimal};
  return out;
}

/// Star graph: node 0 is the centre, nodes 1..k the leaves.
inline MwisInstance gen_star_trap_mis(std::size_t k, double weight_center, double weight_leaf,
                                      std::uint64_t /*seed*/ = 0) {
  if (k < 2) fail(ErrorCode::invalid_config, "star trap needs k >= 2 leaves");
  if (!(weight_center > 0.0) || !(weight_leaf > 0.0))
    fail(ErrorCode::invalid_config, "star trap weights must be positive");
  MwisInstance graph;
  graph.weights.assign(k + 1, weight_leaf);
  graph.weights[0] = weight_center;
  for (std::size_t leaf = 1; leaf <= k; ++leaf) graph.edges.emplace_back(0, leaf);
  return graph;
}

inline void check(const MixConfig& c) {
  if (c.k_min < 2 || c.k_max < c.k_min)
    fail(ErrorCode::invalid_config, "mixed generator needs 2 <= k_min <= k_max");
  if (c.items_per_fish < 1) fail(ErrorCode::invalid_config, "items_per_fish must be >= 1");
  if (!(c.fish_value_min > 0.0) || c.fish_value_max < c.fish_value_min)
    fail(ErrorCode::invalid_config, "fish value range must be positive and ordered");
  if (!(c.whale_position_min > 0.0) || !(c.whale_position_max < 1.0) ||
      c.whale_position_max < c.whale_position_min)
    fail(ErrorCode::invalid_config, "whale position range must lie inside (0, 1)");
  if (!(c.filler_value_min > 0.0) || c.filler_value_max < c.filler_value_min)
    fail(ErrorCode::invalid_config, "filler value range must be positive and ordered");
  if (!(c.value_scale_min > 0.0) || c.value_scale_max < c.value_scale_min)
    fail(ErrorCode::invalid_config, "value scale range must be positive and ordered");
  if (c.filler_bids_max < c.filler_bids_min)
    fail(ErrorCode::invalid_config, "filler bid range must be ordered");
  if (c.traps_max < c.traps_min) fail(ErrorCode::invalid_config, "trap range must be ordered");
  if (c.num_hard > 0 && c.traps_min == 0 && c.filler_bids_min == 0)
    fail(ErrorCode::invalid_config, "hard instances need at least one trap or filler bid");
  if (c.num_easy > 0 && (c.easy_bids == 0 || c.easy_items == 0 || c.easy_max_bundle == 0 ||
                         c.easy_max_bundle > c.easy_items))
    fail(ErrorCode::invalid_config, "easy instances need bids, items and 1 <= bundle <= items");
}

namespace detail {

inline TaggedInstance make_hard(const MixConfig& c, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_k(c.k_min, c.k_max);
  std::uniform_real_distribution<double> pick_fish(c.fish_value_min, c.fish_value_max);
  std::uniform_real_distribution<double> pick_position(c.whale_position_min,
                                                       c.whale_position_max);
  std::uniform_real_distribution<double> pick_filler(c.filler_value_min, c.filler_value_max);

  TaggedInstance out;
  out.tag = InstanceTag::hard;
  out.instance.name = "hard_" + std::to_string(index);
  out.instance.seed = seed;

  // Draw trap shapes first so the pool size check happens before building.
  struct Shape {
    std::size_t k;
    double whale, fish;
  };
  const double scale = draw_scale(c, rng);
  std::size_t filler_bids = c.filler_bids_min;
  if (c.filler_bids_max > c.filler_bids_min)
    filler_bids = std::uniform_int_distribution<std::size_t>(c.filler_bids_min, c.filler_bids_max)(rng);
  std::size_t traps = c.traps_min;
  if (c.traps_max > c.traps_min)
    traps = std::uniform_int_distribution<std::size_t>(c.traps_min, c.traps_max)(rng);
  std::vector<Shape> shapes;
  std::size_t trap_items = 0;
  for (std::size_t t = 0; t < traps; ++t) {
    const std::size_t k = pick_k(rng);
    const double fish = quantize(scale * pick_fish(rng));
    double whale = quantize(fish * (1.0 + pick_position(rng) * static_cast<double>(k - 1)));
    whale = std::clamp(whale, fish + 1.0 / 1024.0, static_cast<double>(k) * fish - 1.0 / 1024.0);
    shapes.push_back({k, whale, fish});
    trap_items += k * c.items_per_fish;
  }
  const std::size_t filler_pool = 2 * filler_bids;
  const std::size_t needed = trap_items + filler_pool;
  if (c.hard_item_pool != 0 && c.hard_item_pool < needed)
    fail(ErrorCode::invalid_config, "item pool of " + std::to_string(c.hard_item_pool) +
                                        " is too small for traps and filler needing " +
                                        std::to_string(needed));

  TrapCursor cursor;
  double greedy_total = 0.0, optimal_total = 0.0;
  for (const auto& s : shapes) {
    auto [g, o] = append_trap(out.instance, cursor, s.k, s.whale, s.fish, s.k * c.items_per_fish);
    greedy_total += g;
    optimal_total += o;
  }

  const ItemId pool_first = cursor.next_item;
  const std::size_t pool = (c.hard_item_pool != 0 ? c.hard_item_pool - trap_items : filler_pool);
  for (std::size_t j = 0; j < pool; ++j) out.instance.items.push_back({cursor.next_item++, 1.0});

  if (filler_bids > 0) {
    std::uniform_int_distribution<std::size_t> pick_item(0, filler_pool - 1);
    std::uniform_int_distribution<int> pick_size(1, 2);
    for (std::size_t b = 0; b < filler_bids; ++b) {
      Bid bid{cursor.next_bid++, quantize(scale * pick_filler(rng)), {}, 1.0};
      const int size = pick_size(rng);
      while (static_cast<int>(bid.items.size()) < size) {
        const ItemId e = pool_first + static_cast<ItemId>(pick_item(rng));
        if (std::find(bid.items.begin(), bid.items.end(), e) == bid.items.end())
          bid.items.push_back(e);
      }
      out.instance.bids.push_back(std::move(bid));
    }
  } else if (!shapes.empty()) {
    out.certificate = Certificate{greedy_total, optimal_total, greedy_total / optimal_total};
  }
  return out;
}

inline TaggedInstance make_easy(const MixConfig& c, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick_value(c.filler_value_min, c.filler_value_max);
  std::uniform_int_distribution<std::size_t> pick_size(1, c.easy_max_bundle);

  TaggedInstance out;
  out.tag = InstanceTag::easy;
  out.instance.name = "easy_" + std::to_string(index);
  out.instance.seed = seed;
  const double scale = draw_scale(c, rng);
  for (std::size_t j = 0; j < c.easy_items; ++j)
    out.instance.items.push_back({static_cast<ItemId>(j), 1.0});

  std::vector<ItemId> pool(c.easy_items);
  for (std::size_t j = 0; j < pool.size(); ++j) pool[j] = static_cast<ItemId>(j);
  for (std::size_t b = 0; b < c.easy_bids; ++b) {
    Bid bid{static_cast<BidId>(b), quantize(scale * pick_value(rng)), {}, 1.0};
    const std::size_t size = pick_size(rng);
    // partial Fisher-Yates
    for (std::size_t j = 0; j < size; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
      std::swap(pool[j], pool[pick(rng)]);
      bid.items.push_back(pool[j]);
    }
    out.instance.bids.push_back(std::move(bid));
  }
  return out;
}

}  // namespace detail

/// Hard (trap + filler) instances first, then easy random ones. Every
/// instance gets its own seed derived from config.seed and its position, so
/// the output is a pure function of the config.
inline std::vector<TaggedInstance> gen_mixed(const MixConfig& config) {
  check(config);
  std::vector<TaggedInstance> out;
  out.reserve(config.num_hard + config.num_easy);
  for (std::size_t i = 0; i < config.num_hard; ++i)
    out.push_back(detail::make_hard(config, detail::derive_seed(config.seed, 2 * i), i));
  for (std::size_t i = 0; i < config.num_easy; ++i)
    out.push_back(detail::make_easy(config, detail::derive_seed(config.seed, 2 * i + 1), i));
  return out;
}

}  // namespace wdp
