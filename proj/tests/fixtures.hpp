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

#include <vector>

#include "wdp_triage/dataset.hpp"
#include "wdp_triage/generators.hpp"
#include "wdp_triage/hardness.hpp"

namespace fixtures {

inline std::vector<wdp::LabeledInstance> labeled_mix(std::size_t hard, std::size_t easy,
                                                     std::uint64_t seed) {
  wdp::MixConfig c;
  c.num_hard = hard;
  c.num_easy = easy;
  c.seed = seed;
  return wdp::label_with_exact(wdp::gen_mixed(c));
}

/// Shared labelled splits, built once per test binary.
struct Splits {
  std::vector<wdp::LabeledInstance> train_instances, test_instances;
  wdp::FeatureDataset train, test;
};

inline const Splits& splits() {
  static const Splits s = [] {
    Splits out;
    out.train_instances = labeled_mix(150, 150, 1001);
    out.test_instances = labeled_mix(50, 50, 2002);
    out.train = wdp::to_feature_dataset(out.train_instances);
    out.test = wdp::to_feature_dataset(out.test_instances);
    return out;
  }();
  return s;
}

inline const wdp::HardnessModel& model() {
  static const wdp::HardnessModel m = wdp::train(splits().train, wdp::TrainConfig{});
  return m;
}

}  // namespace fixtures
