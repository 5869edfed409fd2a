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

// Greedy-gap regressor h(f) in [0, 1] over the 20 structural features, plus
// the evaluation and ablation tooling around it.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "wdp_triage/error.hpp"
#include "wdp_triage/features.hpp"
#include "wdp_triage/mlp.hpp"
#include "wdp_triage/stats.hpp"

namespace wdp {

inline constexpr std::size_t kHiddenUnits = 64;
inline constexpr std::size_t kMinTrainingInstances = 50;

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-5;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  double validation_fraction = 0.2;
  std::uint64_t seed = 42;
};

inline void check(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0) || !(c.beta1 > 0.0 && c.beta1 < 1.0) ||
      !(c.beta2 > 0.0 && c.beta2 < 1.0) || !(c.weight_decay >= 0.0))
    fail(ErrorCode::invalid_config, "optimizer settings out of range");
  if (c.batch_size < 2 || c.max_epochs == 0 || c.patience == 0)
    fail(ErrorCode::invalid_config, "batch size must be >= 2; epochs and patience positive");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0))
    fail(ErrorCode::invalid_config, "validation fraction must lie in (0, 1)");
}

/// Feature vectors paired with greedy-gap labels.
struct FeatureDataset {
  std::vector<FeatureVector> features;
  std::vector<double> gaps;

  std::size_t size() const { return gaps.size(); }
  bool empty() const { return gaps.empty(); }
  void push_back(const FeatureVector& f, double gap) {
    features.push_back(f);
    gaps.push_back(gap);
  }
  FeatureDataset subset(std::span<const std::size_t> rows) const {
    FeatureDataset out;
    for (auto r : rows) out.push_back(features[r], gaps[r]);
    return out;
  }
};

struct HardnessModel {
  mlp::Network network;
  std::array<double, kNumFeatures> feature_mean{};
  std::array<double, kNumFeatures> feature_std{};
  bool trained = false;
  std::size_t best_epoch = 0;
  double best_validation_mse = 0.0;
};

namespace detail {

inline std::vector<double> standardized_rows(const HardnessModel& model,
                                             std::span<const FeatureVector> rows) {
  std::vector<double> x(rows.size() * kNumFeatures);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < kNumFeatures; ++j)
      x[r * kNumFeatures + j] = (rows[r][j] - model.feature_mean[j]) / model.feature_std[j];
  return x;
}

inline void require_trained(const HardnessModel& model) {
  if (!model.trained) fail(ErrorCode::not_trained, "hardness model has not been trained");
}

inline double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

}  // namespace detail

/// Raw network output (no clamping) for a batch of feature vectors.
inline std::vector<double> raw_outputs(const HardnessModel& model,
                                       std::span<const FeatureVector> rows,
                                       mlp::NormMode mode = mlp::NormMode::running_statistics) {
  const auto x = detail::standardized_rows(model, rows);
  return mlp::predict(model.network, x, rows.size(), mode);
}

inline std::vector<double> predict_all(const HardnessModel& model,
                                       std::span<const FeatureVector> rows) {
  detail::require_trained(model);
  auto out = raw_outputs(model, rows);
  for (double& y : out) y = std::isfinite(y) ? std::clamp(y, 0.0, 1.0) : 0.0;
  return out;
}

/// Predicted greedy gap, clamped to [0, 1].
inline double predict(const HardnessModel& model, const FeatureVector& f) {
  return predict_all(model, std::span<const FeatureVector>(&f, 1)).front();
}

/// Fits the regressor with minibatch AdamW on MSE. A seeded shuffle holds out
/// `validation_fraction` of the data; the parameters of the epoch with the
/// lowest validation MSE are kept, and training stops after `patience`
/// epochs without improvement.
inline HardnessModel train(const FeatureDataset& data, const TrainConfig& config) {
  check(config);
  if (data.size() < kMinTrainingInstances)
    fail(ErrorCode::degenerate_data, "training needs at least " +
                                         std::to_string(kMinTrainingInstances) +
                                         " labelled instances, got " + std::to_string(data.size()));
  std::set<double> distinct;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double g = data.gaps[i];
    if (!(g >= 0.0 && g <= 1.0)) fail(ErrorCode::degenerate_data, "gap labels must lie in [0, 1]");
    for (double v : data.features[i].values)
      if (!std::isfinite(v)) fail(ErrorCode::degenerate_data, "non-finite feature value");
    distinct.insert(g);
  }
  if (distinct.size() < 2)
    fail(ErrorCode::degenerate_data, "all gap labels are identical; nothing to regress");

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.validation_fraction * data.size())), 1,
      data.size() - 2);
  const FeatureDataset val = data.subset(std::span(perm).first(n_val));
  const FeatureDataset fit = data.subset(std::span(perm).subspan(n_val));

  HardnessModel model;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    std::vector<double> column(fit.size());
    for (std::size_t r = 0; r < fit.size(); ++r) column[r] = fit.features[r][j];
    const stats::Moments m = stats::moments(column);
    model.feature_mean[j] = m.mean;
    model.feature_std[j] = m.stddev > 0.0 ? m.stddev : 1.0;
  }

  model.network = mlp::Network(kNumFeatures, kHiddenUnits);
  mlp::initialize(model.network, rng);
  mlp::AdamW optimizer(model.network, {config.learning_rate, config.beta1, config.beta2, 1e-8,
                                       config.weight_decay});

  const auto x_fit = detail::standardized_rows(model, fit.features);
  const auto x_val = detail::standardized_rows(model, val.features);

  mlp::Network best = model.network;
  double best_mse = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0, stale = 0;
  std::vector<std::size_t> order(fit.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> xb, yb;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t rows = std::min(config.batch_size, order.size() - start);
      if (rows < 2) continue;  // batch statistics need two samples
      xb.resize(rows * kNumFeatures);
      yb.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(x_fit.begin() + static_cast<std::ptrdiff_t>(src * kNumFeatures), kNumFeatures,
                    xb.begin() + static_cast<std::ptrdiff_t>(r * kNumFeatures));
        yb[r] = fit.gaps[src];
      }
      auto step = mlp::mse_loss_and_gradient(model.network, xb, yb,
                                             mlp::NormMode::batch_statistics);
      mlp::update_running_statistics(model.network, step.cache);
      optimizer.step(model.network, step.gradient);
    }

    const auto pred = mlp::predict(model.network, x_val, val.size());
    const double val_mse = detail::mse(pred, val.gaps);
    if (val_mse < best_mse) {
      best_mse = val_mse;
      best = model.network;
      best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }

  model.network = std::move(best);
  model.trained = true;
  model.best_epoch = best_epoch;
  model.best_validation_mse = best_mse;
  return model;
}

struct EvalReport {
  double mae = 0.0;
  double pearson_r = 0.0;
  bool pearson_degenerate = false;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
  std::size_t true_positive = 0, false_positive = 0, true_negative = 0, false_negative = 0;
  std::vector<std::pair<double, double>> pairs;  // (predicted, true)
};

/// Continuous and thresholded metrics. Positive class: gap > threshold.
/// Precision (recall) is 0 when nothing is predicted (actually) positive.
inline EvalReport evaluate_predictions(std::span<const double> predicted,
                                       std::span<const double> truth, double threshold) {
  if (predicted.empty() || predicted.size() != truth.size())
    fail(ErrorCode::invalid_argument, "evaluation needs equally sized, non-empty inputs");
  EvalReport r;
  r.threshold = threshold;
  double abs_err = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    abs_err += std::abs(predicted[i] - truth[i]);
    r.pairs.emplace_back(predicted[i], truth[i]);
    const bool actual = truth[i] > threshold, guess = predicted[i] > threshold;
    if (actual && guess) ++r.true_positive;
    else if (!actual && guess) ++r.false_positive;
    else if (!actual && !guess) ++r.true_negative;
    else ++r.false_negative;
  }
  const double n = static_cast<double>(predicted.size());
  r.mae = abs_err / n;
  r.pearson_r = stats::pearson(predicted, truth);
  r.pearson_degenerate = stats::stddev(predicted) == 0.0 || stats::stddev(truth) == 0.0;
  r.accuracy = static_cast<double>(r.true_positive + r.true_negative) / n;
  const auto pp = r.true_positive + r.false_positive;
  const auto ap = r.true_positive + r.false_negative;
  r.precision = pp == 0 ? 0.0 : static_cast<double>(r.true_positive) / static_cast<double>(pp);
  r.recall = ap == 0 ? 0.0 : static_cast<double>(r.true_positive) / static_cast<double>(ap);
  return r;
}

inline EvalReport evaluate(const HardnessModel& model, const FeatureDataset& test,
                           double threshold) {
  if (test.empty()) fail(ErrorCode::invalid_argument, "evaluation set is empty");
  const auto predicted = predict_all(model, test.features);
  return evaluate_predictions(predicted, test.gaps, threshold);
}

struct SweepPoint {
  double threshold = 0.0;
  double accuracy = 0.0;
};

inline std::vector<SweepPoint> threshold_sweep(std::span<const double> predicted,
                                               std::span<const double> truth,
                                               std::span<const double> grid) {
  if (grid.empty()) fail(ErrorCode::invalid_argument, "threshold grid is empty");
  std::vector<SweepPoint> curve;
  for (double t : grid) curve.push_back({t, evaluate_predictions(predicted, truth, t).accuracy});
  return curve;
}

inline std::vector<SweepPoint> threshold_sweep(const HardnessModel& model,
                                               const FeatureDataset& test,
                                               std::span<const double> grid) {
  if (grid.empty()) fail(ErrorCode::invalid_argument, "threshold grid is empty");
  if (test.empty()) fail(ErrorCode::invalid_argument, "evaluation set is empty");
  const auto predicted = predict_all(model, test.features);
  return threshold_sweep(predicted, test.gaps, grid);
}

/// Evenly spaced grid lo, lo+step, ..., up to hi inclusive.
inline std::vector<double> threshold_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double t = lo + static_cast<double>(i) * step;
    if (t > hi + 1e-12) break;
    grid.push_back(t);
  }
  return grid;
}

inline SweepPoint best_threshold(std::span<const SweepPoint> curve) {
  SweepPoint best = curve.front();
  for (const auto& p : curve)
    if (p.accuracy > best.accuracy) best = p;
  return best;
}

/// Longest run of consecutive grid points that reach the curve's maximum.
inline std::size_t max_accuracy_plateau(std::span<const SweepPoint> curve) {
  const double top = best_threshold(curve).accuracy;
  std::size_t best = 0, run = 0;
  for (const auto& p : curve) {
    run = p.accuracy == top ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

/// Mean increase in MSE when one column is shuffled, per feature. Rows are
/// put in a canonical order first, so the result does not depend on how the
/// validation set is ordered.
inline std::array<double, kNumFeatures> permutation_importance(const HardnessModel& model,
                                                               const FeatureDataset& validation,
                                                               std::size_t repeats = 10,
                                                               std::uint64_t seed = 42) {
  detail::require_trained(model);
  if (validation.empty()) fail(ErrorCode::invalid_argument, "validation set is empty");
  std::vector<std::size_t> rows(validation.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    if (validation.features[a].values != validation.features[b].values)
      return validation.features[a].values < validation.features[b].values;
    return validation.gaps[a] < validation.gaps[b];
  });
  const FeatureDataset canon = validation.subset(rows);
  const double base = detail::mse(predict_all(model, canon.features), canon.gaps);

  std::array<double, kNumFeatures> importance{};
  std::mt19937_64 rng(seed);
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    double total = 0.0;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      FeatureDataset shuffled = canon;
      std::vector<double> column(canon.size());
      for (std::size_t r = 0; r < canon.size(); ++r) column[r] = canon.features[r][j];
      std::shuffle(column.begin(), column.end(), rng);
      for (std::size_t r = 0; r < canon.size(); ++r) shuffled.features[r][j] = column[r];
      total += detail::mse(predict_all(model, shuffled.features), canon.gaps) - base;
    }
    importance[j] = repeats == 0 ? 0.0 : total / static_cast<double>(repeats);
  }
  return importance;
}

struct LogoRow {
  std::string group;
  std::size_t size = 0;
  double mae_without = 0.0;
  double delta_mae = 0.0;
  double delta_corr = 0.0;
};

struct LogoTable {
  double baseline_mae = 0.0;
  double baseline_corr = 0.0;
  std::vector<LogoRow> rows;
};

inline void check_partition(std::span<const FeatureGroup> groups) {
  std::array<int, kNumFeatures> hits{};
  for (const auto& g : groups)
    for (auto c : g.columns) {
      if (c >= kNumFeatures) fail(ErrorCode::invalid_argument, "feature group column out of range");
      ++hits[c];
    }
  for (std::size_t j = 0; j < kNumFeatures; ++j)
    if (hits[j] != 1)
      fail(ErrorCode::invalid_argument, "feature groups must partition the 20 columns; column " +
                                            std::to_string(j) + " appears " +
                                            std::to_string(hits[j]) + " times");
}

inline FeatureDataset zero_columns(FeatureDataset data, std::span<const std::size_t> columns) {
  for (auto& f : data.features)
    for (auto c : columns) f[c] = 0.0;
  return data;
}

/// Leave-one-group-out: for every group, zero its columns in both splits,
/// retrain from scratch for each seed and compare mean test MAE and
/// correlation against the full-feature baseline.
inline LogoTable logo_ablation(const FeatureDataset& train_set, const FeatureDataset& test_set,
                               std::span<const FeatureGroup> groups, const TrainConfig& config,
                               std::span<const std::uint64_t> seeds) {
  check_partition(groups);
  if (seeds.empty()) fail(ErrorCode::invalid_argument, "ablation needs at least one seed");

  auto run = [&](const FeatureDataset& tr, const FeatureDataset& te) {
    double mae = 0.0, corr = 0.0;
    for (auto s : seeds) {
      TrainConfig c = config;
      c.seed = s;
      const EvalReport r = evaluate(train(tr, c), te, 0.0);
      mae += r.mae;
      corr += r.pearson_r;
    }
    const double k = static_cast<double>(seeds.size());
    return std::pair{mae / k, corr / k};
  };

  LogoTable table;
  std::tie(table.baseline_mae, table.baseline_corr) = run(train_set, test_set);
  for (const auto& g : groups) {
    auto [mae, corr] = run(zero_columns(train_set, g.columns), zero_columns(test_set, g.columns));
    table.rows.push_back({std::string(g.name), g.columns.size(), mae, mae - table.baseline_mae,
                          corr - table.baseline_corr});
  }
  return table;
}

}  // namespace wdp
