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

#include <optional>
#include <span>
#include <vector>

#include "wdp_triage/features.hpp"
#include "wdp_triage/generators.hpp"
#include "wdp_triage/hardness.hpp"
#include "wdp_triage/parallel.hpp"
#include "wdp_triage/solvers.hpp"

namespace wdp {

/// A tagged instance with its greedy gap measured against a proven optimum.
struct LabeledInstance {
  WdpInstance instance;
  InstanceTag tag = InstanceTag::easy;
  std::optional<Certificate> certificate;
  double optimal_welfare = 0.0;
  double greedy_welfare = 0.0;
  double greedy_gap = 0.0;
};

inline LabeledInstance label_with_exact(TaggedInstance tagged, ExactOptions options = {}) {
  const SolveResult opt = exact(tagged.instance, options);
  if (!opt.proven_optimal)
    fail(ErrorCode::not_optimal, "exact solver did not prove optimality on '" +
                                     tagged.instance.name + "' within its budget");
  const GapReport gap = greedy_gap(tagged.instance, opt);
  return {std::move(tagged.instance), tagged.tag, tagged.certificate, gap.optimal_welfare,
          gap.heuristic_welfare, gap.gap};
}

inline std::vector<LabeledInstance> label_with_exact(std::vector<TaggedInstance> tagged,
                                                     ExactOptions options = {}) {
  std::vector<LabeledInstance> out(tagged.size());
  parallel_for(tagged.size(),
               [&](std::size_t i) { out[i] = label_with_exact(std::move(tagged[i]), options); });
  return out;
}

inline FeatureDataset to_feature_dataset(std::span<const LabeledInstance> labeled) {
  FeatureDataset data;
  data.features.resize(labeled.size());
  data.gaps.resize(labeled.size());
  parallel_for(labeled.size(), [&](std::size_t i) {
    data.features[i] = extract(labeled[i].instance);
    data.gaps[i] = labeled[i].greedy_gap;
  });
  return data;
}

}  // namespace wdp
