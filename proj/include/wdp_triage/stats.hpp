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

// Population statistics. Degenerate inputs (empty, zero mean, zero
// variance) map to 0 instead of NaN.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace wdp::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double max(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return *std::max_element(xs.begin(), xs.end());
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
  double skewness = 0.0;  // m3 / m2^1.5
  double kurtosis = 0.0;  // m4 / m2^2 - 3
};

namespace detail {

// A variance below this, relative to the data scale, is round-off from
// averaging identical values.
inline bool negligible_variance(double m2, double scale) {
  const double floor = 1e-12 * std::max(scale, 1e-300);
  return m2 <= floor * floor;
}

inline double scale_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace detail

inline Moments moments(std::span<const double> xs) {
  Moments out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = mean(xs);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - out.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (detail::negligible_variance(m2, detail::scale_of(xs))) return out;
  out.stddev = std::sqrt(m2);
  out.skewness = m3 / std::pow(m2, 1.5);
  out.kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

inline double stddev(std::span<const double> xs) { return moments(xs).stddev; }

/// Coefficient of variation std / mean; 0 when the mean is 0.
inline double cv(std::span<const double> xs) {
  const Moments m = moments(xs);
  return m.mean == 0.0 ? 0.0 : m.stddev / m.mean;
}

/// Pearson correlation; 0 when either side has no variance.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = std::min(xs.size(), ys.size());
  if (n == 0) return 0.0;
  const double mx = mean(xs.first(n)), my = mean(ys.first(n));
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double nn = static_cast<double>(n);
  if (detail::negligible_variance(sxx / nn, detail::scale_of(xs.first(n))) ||
      detail::negligible_variance(syy / nn, detail::scale_of(ys.first(n))))
    return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace wdp::stats
