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

// Instance triage: send an instance to greedy (cheap) or to the exact
// branch-and-bound solver (expensive).
//
// Two selectors are available. The CV selector looks only at the
// coefficient of variation of per-item bid counts: trap structure spreads
// demand uniformly, so a low CV routes expensive. The learned selector
// thresholds the predicted greedy gap of a trained HardnessModel.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wdp_triage/dataset.hpp"
#include "wdp_triage/error.hpp"
#include "wdp_triage/features.hpp"
#include "wdp_triage/hardness.hpp"
#include "wdp_triage/solvers.hpp"

namespace wdp {

enum class Route { cheap, expensive };
enum class SelectorMode { cv_threshold, learned };

inline std::string_view to_string(Route r) { return r == Route::cheap ? "cheap" : "expensive"; }
inline std::string_view to_string(SelectorMode m) {
  return m == SelectorMode::cv_threshold ? "cv" : "learned";
}

inline constexpr double kDefaultCvThreshold = 0.35;

struct SelectorConfig {
  SelectorMode mode = SelectorMode::cv_threshold;
  double cv_threshold = kDefaultCvThreshold;
  double learned_threshold = 0.05;
  double time_limit = 10.0;      // seconds, expensive arm
  std::uint64_t node_limit = 0;  // expensive arm, 0 = unlimited

  ExactOptions exact_options() const { return {time_limit, node_limit}; }
};

inline void check(const SelectorConfig& c) {
  if (!std::isfinite(c.cv_threshold) || !std::isfinite(c.learned_threshold))
    fail(ErrorCode::invalid_config, "selector thresholds must be finite");
  if (!(c.time_limit > 0.0)) fail(ErrorCode::invalid_config, "time limit must be positive");
}

/// CV mode: expensive iff cv <= threshold (ties go expensive).
/// Learned mode: expensive iff predicted gap > threshold.
inline Route select(const WdpInstance& instance, const SelectorConfig& config,
                    const HardnessModel* model = nullptr) {
  check(config);
  if (config.mode == SelectorMode::cv_threshold)
    return bid_density_cv(instance) <= config.cv_threshold ? Route::expensive : Route::cheap;
  if (model == nullptr || !model->trained)
    fail(ErrorCode::not_trained, "learned selector needs a trained hardness model");
  return predict(*model, extract(instance)) > config.learned_threshold ? Route::expensive
                                                                      : Route::cheap;
}

struct HybridSolve {
  SolveResult result;
  Route route = Route::cheap;
};

/// Cheap arm: greedy. Expensive arm: exact within the time limit, falling
/// back to the greedy allocation if a truncated search ends up worse.
inline HybridSolve solve_routed(const WdpInstance& instance, Route route, ExactOptions budget) {
  HybridSolve out;
  out.route = route;
  if (route == Route::cheap) {
    out.result = greedy(instance);
    return out;
  }
  out.result = exact(instance, budget);
  if (!out.result.proven_optimal) {
    SolveResult fallback = greedy(instance);
    if (fallback.welfare() > out.result.welfare()) {
      fallback.wall_time += out.result.wall_time;
      fallback.solver = "exact+greedy_fallback";
      out.result = std::move(fallback);
    }
  }
  return out;
}

inline HybridSolve hybrid_solve(const WdpInstance& instance, const SelectorConfig& config,
                                const HardnessModel* model = nullptr) {
  return solve_routed(instance, select(instance, config, model), config.exact_options());
}

/// How routes are chosen in a benchmark run.
enum class RoutingPolicy { selector, greedy_only, expensive_only, oracle };

inline std::string_view to_string(RoutingPolicy p) {
  switch (p) {
    case RoutingPolicy::selector: return "selector";
    case RoutingPolicy::greedy_only: return "greedy_only";
    case RoutingPolicy::expensive_only: return "expensive_only";
    case RoutingPolicy::oracle: return "oracle";
  }
  return "?";
}

struct RoutingDecision {
  std::string name;
  InstanceTag tag = InstanceTag::easy;
  Route route = Route::cheap;
  double gap = 0.0;
  double cv = 0.0;
  std::optional<double> predicted_gap;
  bool proven_optimal = false;
};

struct HybridReport {
  std::string policy;
  double hard_gap = 0.0;
  double easy_gap = 0.0;
  double overall_gap = 0.0;
  double routing_accuracy = 0.0;
  std::size_t num_hard = 0, num_easy = 0;
  std::vector<RoutingDecision> decisions;
};

/// Runs every labelled instance through the policy and measures the gap of
/// the returned welfare against the recorded optimum.
inline HybridReport evaluate_hybrid(std::span<const LabeledInstance> dataset,
                                    const SelectorConfig& config, RoutingPolicy policy,
                                    const HardnessModel* model = nullptr) {
  check(config);
  if (policy == RoutingPolicy::selector && config.mode == SelectorMode::learned &&
      (model == nullptr || !model->trained))
    fail(ErrorCode::not_trained, "learned selector needs a trained hardness model");
  for (const auto& item : dataset)
    if (!(item.optimal_welfare > 0.0))
      fail(ErrorCode::invalid_argument,
           "instance '" + item.instance.name + "' has no recorded optimum");

  HybridReport report;
  report.policy = std::string(to_string(policy));
  report.decisions.resize(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t i) {
    const LabeledInstance& item = dataset[i];
    RoutingDecision d;
    d.name = item.instance.name;
    d.tag = item.tag;
    d.cv = bid_density_cv(item.instance);
    if (model != nullptr && model->trained) d.predicted_gap = predict(*model, extract(item.instance));
    switch (policy) {
      case RoutingPolicy::selector: d.route = select(item.instance, config, model); break;
      case RoutingPolicy::greedy_only: d.route = Route::cheap; break;
      case RoutingPolicy::expensive_only: d.route = Route::expensive; break;
      case RoutingPolicy::oracle:
        d.route = item.tag == InstanceTag::hard ? Route::expensive : Route::cheap;
        break;
    }
    const HybridSolve solved = solve_routed(item.instance, d.route, config.exact_options());
    d.gap = relative_gap(item.optimal_welfare, solved.result.welfare());
    d.proven_optimal = solved.result.proven_optimal;
    report.decisions[i] = std::move(d);
  });

  double hard = 0.0, easy = 0.0;
  std::size_t correct = 0;
  for (const auto& d : report.decisions) {
    if (d.tag == InstanceTag::hard) {
      hard += d.gap;
      ++report.num_hard;
    } else {
      easy += d.gap;
      ++report.num_easy;
    }
    if ((d.route == Route::expensive) == (d.tag == InstanceTag::hard)) ++correct;
  }
  const std::size_t n = report.decisions.size();
  report.hard_gap = report.num_hard ? hard / static_cast<double>(report.num_hard) : 0.0;
  report.easy_gap = report.num_easy ? easy / static_cast<double>(report.num_easy) : 0.0;
  report.overall_gap = n ? (hard + easy) / static_cast<double>(n) : 0.0;
  report.routing_accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
  return report;
}

struct CvHistogram {
  std::vector<double> hard, easy;
  std::optional<double> max_hard, min_easy;
};

inline CvHistogram cv_histogram(std::span<const LabeledInstance> dataset) {
  CvHistogram h;
  for (const auto& item : dataset) {
    const double cv = bid_density_cv(item.instance);
    (item.tag == InstanceTag::hard ? h.hard : h.easy).push_back(cv);
  }
  if (!h.hard.empty()) h.max_hard = *std::max_element(h.hard.begin(), h.hard.end());
  if (!h.easy.empty()) h.min_easy = *std::min_element(h.easy.begin(), h.easy.end());
  return h;
}

/// CV threshold from a calibration split: the midpoint between the largest
/// hard CV and the smallest easy CV when the groups separate, otherwise the
/// midpoint between consecutive observed CVs with the best routing accuracy.
inline double calibrate_cv_threshold(std::span<const LabeledInstance> calibration) {
  const CvHistogram h = cv_histogram(calibration);
  if (!h.max_hard || !h.min_easy)
    fail(ErrorCode::invalid_argument, "calibration needs both hard and easy instances");
  if (*h.max_hard < *h.min_easy) return 0.5 * (*h.max_hard + *h.min_easy);

  std::vector<double> all = h.hard;
  all.insert(all.end(), h.easy.begin(), h.easy.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  double best_t = all.front();
  std::size_t best_correct = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double t = i + 1 < all.size() ? 0.5 * (all[i] + all[i + 1]) : all[i];
    std::size_t correct = 0;
    for (double cv : h.hard) correct += cv <= t;
    for (double cv : h.easy) correct += cv > t;
    if (correct > best_correct) {
      best_correct = correct;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace wdp
