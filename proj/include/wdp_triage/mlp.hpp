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

// Small fully connected regressor:
//
//   Linear(in, h) -> BatchNorm -> ReLU -> Linear(h, h) -> BatchNorm -> ReLU
//   -> Linear(h, 1)
//
// in double precision with hand-written backpropagation. Batches are
// row-major matrices (rows = samples).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace wdp::mlp {

struct Linear {
  std::size_t in = 0, out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out

  Linear() = default;
  Linear(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim), out(out_dim), weight(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}
};

struct BatchNorm {
  std::size_t dim = 0;
  std::vector<double> gamma, beta;
  std::vector<double> running_mean, running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;

  BatchNorm() = default;
  explicit BatchNorm(std::size_t d)
      : dim(d), gamma(d, 1.0), beta(d, 0.0), running_mean(d, 0.0), running_var(d, 1.0) {}
};

enum class NormMode { batch_statistics, running_statistics };

struct Network {
  Linear fc1, fc2, fc3;
  BatchNorm bn1, bn2;

  Network() = default;
  Network(std::size_t in, std::size_t hidden)
      : fc1(in, hidden), fc2(hidden, hidden), fc3(hidden, 1), bn1(hidden), bn2(hidden) {}

  std::size_t input_dim() const { return fc1.in; }
  std::size_t hidden_dim() const { return fc1.out; }

  /// Trainable tensors in a fixed order; gradients share the layout.
  std::vector<std::span<double>> parameters() {
    return {fc1.weight, fc1.bias, bn1.gamma, bn1.beta, fc2.weight,
            fc2.bias,   bn2.gamma, bn2.beta, fc3.weight, fc3.bias};
  }
  std::vector<std::span<const double>> parameters() const {
    return {fc1.weight, fc1.bias, bn1.gamma, bn1.beta, fc2.weight,
            fc2.bias,   bn2.gamma, bn2.beta, fc3.weight, fc3.bias};
  }
};

/// Fan-in uniform initialisation U(-1/sqrt(in), 1/sqrt(in)) for weights and
/// biases; BatchNorm starts as the identity.
inline void initialize(Network& net, std::mt19937_64& rng) {
  for (Linear* layer : {&net.fc1, &net.fc2, &net.fc3}) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer->in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& w : layer->weight) w = u(rng);
    for (double& b : layer->bias) b = u(rng);
  }
  net.bn1 = BatchNorm(net.hidden_dim());
  net.bn2 = BatchNorm(net.hidden_dim());
}

namespace detail {

inline std::vector<double> affine(const Linear& layer, std::span<const double> x,
                                  std::size_t rows) {
  std::vector<double> y(rows * layer.out);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * layer.in;
    double* yr = y.data() + r * layer.out;
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* w = layer.weight.data() + o * layer.in;
      double s = layer.bias[o];
      for (std::size_t i = 0; i < layer.in; ++i) s += w[i] * xr[i];
      yr[o] = s;
    }
  }
  return y;
}

struct NormCache {
  std::vector<double> xhat;     // rows x dim
  std::vector<double> inv_std;  // dim
  std::vector<double> batch_mean, batch_var;
};

inline std::vector<double> normalize(const BatchNorm& bn, std::span<const double> x,
                                     std::size_t rows, NormMode mode, NormCache& cache) {
  const std::size_t d = bn.dim;
  cache.xhat.assign(rows * d, 0.0);
  cache.inv_std.assign(d, 0.0);
  cache.batch_mean.assign(d, 0.0);
  cache.batch_var.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mu, var;
    if (mode == NormMode::batch_statistics) {
      mu = 0.0;
      for (std::size_t r = 0; r < rows; ++r) mu += x[r * d + j];
      mu /= static_cast<double>(rows);
      var = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const double c = x[r * d + j] - mu;
        var += c * c;
      }
      var /= static_cast<double>(rows);
    } else {
      mu = bn.running_mean[j];
      var = bn.running_var[j];
    }
    cache.batch_mean[j] = mu;
    cache.batch_var[j] = var;
    cache.inv_std[j] = 1.0 / std::sqrt(var + bn.epsilon);
  }
  std::vector<double> y(rows * d);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (x[r * d + j] - cache.batch_mean[j]) * cache.inv_std[j];
      cache.xhat[r * d + j] = h;
      y[r * d + j] = bn.gamma[j] * h + bn.beta[j];
    }
  return y;
}

inline void relu_inplace(std::vector<double>& x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

}  // namespace detail

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
  std::size_t rows = 0;
  std::vector<double> input;
  detail::NormCache norm1, norm2;
  std::vector<double> act1, act2;  // post-ReLU
  std::vector<double> output;
};

inline ForwardCache forward(const Network& net, std::span<const double> x, std::size_t rows,
                            NormMode mode) {
  ForwardCache c;
  c.rows = rows;
  c.input.assign(x.begin(), x.end());
  auto z1 = detail::affine(net.fc1, x, rows);
  c.act1 = detail::normalize(net.bn1, z1, rows, mode, c.norm1);
  detail::relu_inplace(c.act1);
  auto z2 = detail::affine(net.fc2, c.act1, rows);
  c.act2 = detail::normalize(net.bn2, z2, rows, mode, c.norm2);
  detail::relu_inplace(c.act2);
  c.output = detail::affine(net.fc3, c.act2, rows);
  return c;
}

inline std::vector<double> predict(const Network& net, std::span<const double> x,
                                   std::size_t rows,
                                   NormMode mode = NormMode::running_statistics) {
  return forward(net, x, rows, mode).output;
}

/// Folds the batch statistics of a training-mode pass into the running
/// estimates (variance stored unbiased).
inline void update_running_statistics(Network& net, const ForwardCache& cache) {
  const double n = static_cast<double>(cache.rows);
  const double unbias = cache.rows > 1 ? n / (n - 1.0) : 1.0;
  auto fold = [&](BatchNorm& bn, const detail::NormCache& nc) {
    for (std::size_t j = 0; j < bn.dim; ++j) {
      bn.running_mean[j] = (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * nc.batch_mean[j];
      bn.running_var[j] =
          (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * nc.batch_var[j] * unbias;
    }
  };
  fold(net.bn1, cache.norm1);
  fold(net.bn2, cache.norm2);
}

namespace detail {

// Gradient of a Linear layer; returns dL/dx.
inline std::vector<double> linear_backward(const Linear& layer, Linear& grad,
                                           std::span<const double> x,
                                           std::span<const double> dy, std::size_t rows) {
  std::vector<double> dx(rows * layer.in, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * layer.in;
    const double* dyr = dy.data() + r * layer.out;
    double* dxr = dx.data() + r * layer.in;
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      grad.bias[o] += g;
      double* gw = grad.weight.data() + o * layer.in;
      const double* w = layer.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) {
        gw[i] += g * xr[i];
        dxr[i] += g * w[i];
      }
    }
  }
  return dx;
}

// dL/dy through ReLU(BN(x)) given post-activation values.
inline std::vector<double> norm_relu_backward(const BatchNorm& bn, BatchNorm& grad,
                                              const NormCache& cache,
                                              std::span<const double> activated,
                                              std::vector<double> dout, std::size_t rows,
                                              NormMode mode) {
  const std::size_t d = bn.dim;
  for (std::size_t k = 0; k < dout.size(); ++k)
    if (!(activated[k] > 0.0)) dout[k] = 0.0;

  std::vector<double> dx(rows * d, 0.0);
  const double n = static_cast<double>(rows);
  for (std::size_t j = 0; j < d; ++j) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      sum_dy += dout[r * d + j];
      sum_dy_xhat += dout[r * d + j] * cache.xhat[r * d + j];
    }
    grad.beta[j] += sum_dy;
    grad.gamma[j] += sum_dy_xhat;
    const double g = bn.gamma[j] * cache.inv_std[j];
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t k = r * d + j;
      if (mode == NormMode::batch_statistics)
        dx[k] = g * (dout[k] - sum_dy / n - cache.xhat[k] * sum_dy_xhat / n);
      else
        dx[k] = g * dout[k];
    }
  }
  return dx;
}

}  // namespace detail

/// Accumulates dL/dparams into `grad` (which must share net's shape) given
/// dL/doutput for the cached pass.
inline void backward(const Network& net, Network& grad, const ForwardCache& cache,
                     std::span<const double> doutput, NormMode mode) {
  const std::size_t rows = cache.rows;
  auto d_act2 = detail::linear_backward(net.fc3, grad.fc3, cache.act2, doutput, rows);
  auto d_z2 = detail::norm_relu_backward(net.bn2, grad.bn2, cache.norm2, cache.act2,
                                         std::move(d_act2), rows, mode);
  auto d_act1 = detail::linear_backward(net.fc2, grad.fc2, cache.act1, d_z2, rows);
  auto d_z1 = detail::norm_relu_backward(net.bn1, grad.bn1, cache.norm1, cache.act1,
                                         std::move(d_act1), rows, mode);
  detail::linear_backward(net.fc1, grad.fc1, cache.input, d_z1, rows);
}

inline Network zeros_like(const Network& net) {
  Network g(net.input_dim(), net.hidden_dim());
  for (auto p : g.parameters()) std::fill(p.begin(), p.end(), 0.0);
  return g;
}

struct LossAndGradient {
  double loss = 0.0;
  Network gradient;
  ForwardCache cache;
};

/// Mean squared error over the batch plus an optional L2 penalty
/// 0.5 * l2 * ||theta||^2 on all trainable tensors.
inline LossAndGradient mse_loss_and_gradient(const Network& net, std::span<const double> x,
                                             std::span<const double> targets, NormMode mode,
                                             double l2 = 0.0) {
  const std::size_t rows = targets.size();
  LossAndGradient out;
  out.cache = forward(net, x, rows, mode);
  std::vector<double> dout(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double diff = out.cache.output[r] - targets[r];
    out.loss += diff * diff;
    dout[r] = 2.0 * diff / static_cast<double>(rows);
  }
  out.loss /= static_cast<double>(rows);
  out.gradient = zeros_like(net);
  backward(net, out.gradient, out.cache, dout, mode);
  if (l2 != 0.0) {
    auto params = net.parameters();
    auto grads = out.gradient.parameters();
    for (std::size_t t = 0; t < params.size(); ++t)
      for (std::size_t k = 0; k < params[t].size(); ++k) {
        out.loss += 0.5 * l2 * params[t][k] * params[t][k];
        grads[t][k] += l2 * params[t][k];
      }
  }
  return out;
}

/// AdamW with decoupled weight decay applied to every trainable tensor.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-5;
  };

  AdamW(const Network& shape, Options options)
      : options_(options), first_(zeros_like(shape)), second_(zeros_like(shape)) {}

  void step(Network& net, const Network& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    auto params = net.parameters();
    auto grads = grad.parameters();
    auto m = first_.parameters();
    auto v = second_.parameters();
    for (std::size_t t = 0; t < params.size(); ++t)
      for (std::size_t k = 0; k < params[t].size(); ++k) {
        const double g = grads[t][k];
        m[t][k] = options_.beta1 * m[t][k] + (1.0 - options_.beta1) * g;
        v[t][k] = options_.beta2 * v[t][k] + (1.0 - options_.beta2) * g * g;
        double& p = params[t][k];
        p *= 1.0 - options_.learning_rate * options_.weight_decay;
        p -= options_.learning_rate * (m[t][k] / c1) / (std::sqrt(v[t][k] / c2) + options_.epsilon);
      }
  }

 private:
  Options options_;
  Network first_, second_;
  std::uint64_t t_ = 0;
};

}  // namespace wdp::mlp
