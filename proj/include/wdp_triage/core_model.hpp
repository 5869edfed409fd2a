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

// Winner determination instances and their conflict-graph view.
//
// An instance has m items with capacities C_e and n bids. Bid i carries a
// value v_i, an item set E_i and a scalar demand c_i that it places on every
// item of E_i. An allocation x in {0,1}^n is feasible when, for every item e,
//
//   sum_{i accepted, e in E_i} c_i <= C_e.
//
// With unit capacities and demands two bids can coexist iff their item sets
// are disjoint, so the winner determination problem becomes maximum weight
// independent set on the bid conflict graph. conflict_graph() and
// mwis_to_wdp() move between the two forms.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wdp_triage/error.hpp"

namespace wdp {

using ItemId = std::int64_t;
using BidId = std::int64_t;

/// Absolute slack allowed when comparing item loads against capacities.
inline constexpr double kCapacityTolerance = 1e-9;

struct Item {
  ItemId id = 0;
  double capacity = 1.0;

  friend bool operator==(const Item&, const Item&) = default;
};

struct Bid {
  BidId id = 0;
  double value = 1.0;
  std::vector<ItemId> items;
  double demand = 1.0;

  friend bool operator==(const Bid&, const Bid&) = default;
};

struct WdpInstance {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<Item> items;
  std::vector<Bid> bids;

  std::size_t num_items() const { return items.size(); }
  std::size_t num_bids() const { return bids.size(); }

  friend bool operator==(const WdpInstance&, const WdpInstance&) = default;
};

struct Allocation {
  std::vector<bool> accepted;  // aligned with WdpInstance::bids
  double welfare = 0.0;
  bool feasible = true;
};

struct MwisInstance {
  std::vector<double> weights;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j

  std::size_t num_nodes() const { return weights.size(); }
};

/// Returns one human-readable line per broken invariant; empty when the
/// instance is well formed.
inline std::vector<std::string> validate(const WdpInstance& instance) {
  std::vector<std::string> out;
  if (instance.items.empty()) out.emplace_back("instance has no items");
  if (instance.bids.empty()) out.emplace_back("instance has no bids");

  std::unordered_set<ItemId> item_ids;
  for (const Item& item : instance.items) {
    const std::string tag = "item " + std::to_string(item.id);
    if (!item_ids.insert(item.id).second) out.push_back(tag + ": duplicate item id");
    if (!(item.capacity > 0.0) || !std::isfinite(item.capacity))
      out.push_back(tag + ": capacity must be positive and finite");
  }

  std::unordered_set<BidId> bid_ids;
  for (const Bid& bid : instance.bids) {
    const std::string tag = "bid " + std::to_string(bid.id);
    if (!bid_ids.insert(bid.id).second) out.push_back(tag + ": duplicate bid id");
    if (!(bid.value > 0.0) || !std::isfinite(bid.value))
      out.push_back(tag + ": value must be positive and finite");
    if (!(bid.demand > 0.0) || !std::isfinite(bid.demand))
      out.push_back(tag + ": demand must be positive and finite");
    if (bid.items.empty()) out.push_back(tag + ": empty item set");

    std::unordered_set<ItemId> seen;
    for (ItemId e : bid.items) {
      if (!item_ids.contains(e))
        out.push_back(tag + ": references unknown item " + std::to_string(e));
      if (!seen.insert(e).second)
        out.push_back(tag + ": item " + std::to_string(e) + " listed twice");
    }
  }
  return out;
}

inline void require_valid(const WdpInstance& instance) {
  auto problems = validate(instance);
  if (problems.empty()) return;
  std::string message = "invalid instance '" + instance.name + "': " + problems.front();
  if (problems.size() > 1)
    message += " (+" + std::to_string(problems.size() - 1) + " more)";
  fail(ErrorCode::invalid_instance, message);
}

/// Index-based copy of an instance used by the solvers and feature code:
/// items are renumbered 0..m-1 in declaration order.
struct DenseInstance {
  std::vector<double> capacity;
  std::vector<double> value;
  std::vector<double> demand;
  std::vector<std::vector<std::uint32_t>> bid_items;

  std::size_t num_items() const { return capacity.size(); }
  std::size_t num_bids() const { return value.size(); }
};

inline DenseInstance densify(const WdpInstance& instance) {
  DenseInstance dense;
  std::unordered_map<ItemId, std::uint32_t> index;
  index.reserve(instance.items.size());
  dense.capacity.reserve(instance.items.size());
  for (const Item& item : instance.items) {
    index.emplace(item.id, static_cast<std::uint32_t>(dense.capacity.size()));
    dense.capacity.push_back(item.capacity);
  }
  dense.value.reserve(instance.bids.size());
  dense.demand.reserve(instance.bids.size());
  dense.bid_items.reserve(instance.bids.size());
  for (const Bid& bid : instance.bids) {
    dense.value.push_back(bid.value);
    dense.demand.push_back(bid.demand);
    auto& row = dense.bid_items.emplace_back();
    row.reserve(bid.items.size());
    for (ItemId e : bid.items) {
      auto it = index.find(e);
      if (it == index.end())
        fail(ErrorCode::invalid_instance,
             "bid " + std::to_string(bid.id) + " references unknown item " + std::to_string(e));
      row.push_back(it->second);
    }
  }
  return dense;
}

/// Builds an allocation from an acceptance mask, computing welfare as the
/// sum over accepted bids in bid order and checking every capacity.
inline Allocation make_allocation(const WdpInstance& instance, std::vector<bool> accepted) {
  if (accepted.size() != instance.bids.size())
    fail(ErrorCode::invalid_argument, "acceptance mask length does not match bid count");
  const DenseInstance dense = densify(instance);
  Allocation alloc;
  std::vector<double> load(dense.num_items(), 0.0);
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    if (!accepted[i]) continue;
    alloc.welfare += dense.value[i];
    for (auto e : dense.bid_items[i]) load[e] += dense.demand[i];
  }
  alloc.feasible = true;
  for (std::size_t e = 0; e < load.size(); ++e)
    if (load[e] > dense.capacity[e] + kCapacityTolerance) alloc.feasible = false;
  alloc.accepted = std::move(accepted);
  return alloc;
}

inline std::vector<std::string> validate(const MwisInstance& mwis) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < mwis.weights.size(); ++i)
    if (!(mwis.weights[i] > 0.0) || !std::isfinite(mwis.weights[i]))
      out.push_back("node " + std::to_string(i) + ": weight must be positive and finite");
  std::unordered_set<std::uint64_t> seen;
  for (auto [a, b] : mwis.edges) {
    const std::string tag = "edge (" + std::to_string(a) + "," + std::to_string(b) + ")";
    if (a >= mwis.num_nodes() || b >= mwis.num_nodes()) {
      out.push_back(tag + ": node index out of range");
      continue;
    }
    if (a == b) out.push_back(tag + ": self-loop");
    auto lo = std::min(a, b), hi = std::max(a, b);
    if (!seen.insert((static_cast<std::uint64_t>(lo) << 32) | hi).second)
      out.push_back(tag + ": duplicate edge");
  }
  return out;
}

/// Node i carries v_i; (i, j) is an edge iff E_i and E_j share an item.
/// Edges come out sorted with i < j.
inline MwisInstance conflict_graph(const WdpInstance& instance) {
  const DenseInstance dense = densify(instance);
  MwisInstance graph;
  graph.weights = dense.value;

  std::vector<std::vector<std::uint32_t>> bids_on_item(dense.num_items());
  for (std::size_t i = 0; i < dense.num_bids(); ++i)
    for (auto e : dense.bid_items[i]) bids_on_item[e].push_back(static_cast<std::uint32_t>(i));

  std::vector<std::uint64_t> keys;
  for (const auto& on_item : bids_on_item)
    for (std::size_t a = 0; a < on_item.size(); ++a)
      for (std::size_t b = a + 1; b < on_item.size(); ++b) {
        auto lo = std::min(on_item[a], on_item[b]), hi = std::max(on_item[a], on_item[b]);
        if (lo != hi) keys.push_back((static_cast<std::uint64_t>(lo) << 32) | hi);
      }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  graph.edges.reserve(keys.size());
  for (auto key : keys) graph.edges.emplace_back(key >> 32, key & 0xffffffffu);
  return graph;
}

/// One unit-demand bid per node and one unit-capacity item per edge, shared
/// by both endpoints. A node without edges gets a private unit item so its
/// bid still requests something; that item never binds.
inline WdpInstance mwis_to_wdp(const MwisInstance& mwis) {
  if (auto problems = validate(mwis); !problems.empty())
    fail(ErrorCode::invalid_instance, "invalid MWIS instance: " + problems.front());

  WdpInstance instance;
  instance.name = "mwis";
  instance.bids.resize(mwis.num_nodes());
  for (std::size_t i = 0; i < mwis.num_nodes(); ++i) {
    instance.bids[i].id = static_cast<BidId>(i);
    instance.bids[i].value = mwis.weights[i];
    instance.bids[i].demand = 1.0;
  }
  ItemId next = 0;
  for (auto [a, b] : mwis.edges) {
    instance.items.push_back({next, 1.0});
    instance.bids[a].items.push_back(next);
    instance.bids[b].items.push_back(next);
    ++next;
  }
  for (auto& bid : instance.bids) {
    if (!bid.items.empty()) continue;
    instance.items.push_back({next, 1.0});
    bid.items.push_back(next++);
  }
  return instance;
}

}  // namespace wdp
