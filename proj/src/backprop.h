/*
 * Copyright 2026 The djack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reverse-mode pass over the network, templated on the scalar type. With
// T = Dual (value plus one tangent) the reverse pass run on parameters
// theta + t * v yields grad + t * (H v): forward-over-reverse HVPs.

#ifndef DJACK_SRC_BACKPROP_H_
#define DJACK_SRC_BACKPROP_H_

#include <cmath>
#include <span>
#include <vector>

#include "djack/model.h"

namespace djack::internal {

struct Dual {
  double v = 0.0;
  double d = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, double b) { return {a.v - b, a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
inline Dual operator*(double a, Dual b) { return {a * b.v, a * b.d}; }
inline Dual& operator+=(Dual& a, Dual b) {
  a.v += b.v;
  a.d += b.d;
  return a;
}

inline double primal(double x) { return x; }
inline double primal(Dual x) { return x.v; }

inline double activate(Activation act, double z) {
  return act == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}
inline Dual activate(Activation act, Dual z) {
  if (act == Activation::kTanh) {
    const double t = std::tanh(z.v);
    return {t, (1.0 - t * t) * z.d};
  }
  return z.v > 0.0 ? z : Dual{};
}

// Derivative of the activation expressed through its output a = act(z).
inline double activation_slope(Activation act, double a) {
  return act == Activation::kTanh ? 1.0 - a * a : (a > 0.0 ? 1.0 : 0.0);
}
inline Dual activation_slope(Activation act, Dual a) {
  if (act == Activation::kTanh) return {1.0 - a.v * a.v, -2.0 * a.v * a.d};
  return {a.v > 0.0 ? 1.0 : 0.0, 0.0};
}

template <typename T>
struct Workspace {
  std::vector<std::vector<T>> acts;
  std::vector<T> delta;
  std::vector<T> delta_prev;
};

template <typename T>
T forward(const Network& net, const T* params, std::span<const double> x,
          Workspace<T>& ws) {
  const auto layers = net.layers();
  const Activation act = net.spec().activation;
  ws.acts.resize(layers.size() + 1);
  ws.acts[0].assign(x.size(), T{});
  for (std::size_t k = 0; k < x.size(); ++k) ws.acts[0][k] = T{x[k]};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const auto& in = ws.acts[l];
    auto& out = ws.acts[l + 1];
    out.assign(static_cast<std::size_t>(layer.out), T{});
    const T* w = params + layer.weight_offset;
    const T* b = params + layer.bias_offset;
    for (int j = 0; j < layer.out; ++j) {
      T z = b[j];
      const T* wrow = w + static_cast<std::ptrdiff_t>(j) * layer.in;
      for (int k = 0; k < layer.in; ++k) z += wrow[k] * in[static_cast<std::size_t>(k)];
      out[static_cast<std::size_t>(j)] = layer.hidden ? activate(act, z) : z;
    }
  }
  return ws.acts.back()[0];
}

// Adds weight * d/dtheta (f(x) - y)^2 into grad and returns (f(x) - y)^2.
template <typename T>
T accumulate_point(const Network& net, const T* params, std::span<const double> x,
                   double y, double weight, T* grad, Workspace<T>& ws) {
  const T f = forward(net, params, x, ws);
  const T residual = f - y;
  const auto layers = net.layers();
  const Activation act = net.spec().activation;
  ws.delta.assign(1, (2.0 * weight) * residual);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& in = ws.acts[l];
    const T* w = params + layer.weight_offset;
    T* gw = grad + layer.weight_offset;
    T* gb = grad + layer.bias_offset;
    for (int j = 0; j < layer.out; ++j) {
      const T dj = ws.delta[static_cast<std::size_t>(j)];
      T* grow = gw + static_cast<std::ptrdiff_t>(j) * layer.in;
      for (int k = 0; k < layer.in; ++k) grow[k] += dj * in[static_cast<std::size_t>(k)];
      gb[j] += dj;
    }
    if (l == 0) break;
    ws.delta_prev.assign(static_cast<std::size_t>(layer.in), T{});
    for (int j = 0; j < layer.out; ++j) {
      const T dj = ws.delta[static_cast<std::size_t>(j)];
      const T* wrow = w + static_cast<std::ptrdiff_t>(j) * layer.in;
      for (int k = 0; k < layer.in; ++k) {
        ws.delta_prev[static_cast<std::size_t>(k)] += wrow[k] * dj;
      }
    }
    for (int k = 0; k < layer.in; ++k) {
      auto& dk = ws.delta_prev[static_cast<std::size_t>(k)];
      dk = dk * activation_slope(act, in[static_cast<std::size_t>(k)]);
    }
    std::swap(ws.delta, ws.delta_prev);
  }
  return residual * residual;
}

// Adds weight * d/dtheta (penalty * ||w||^2) into grad; returns penalty * ||w||^2.
template <typename T>
T accumulate_penalty(const Network& net, const T* params, double penalty,
                     double weight, T* grad) {
  T total{};
  for (const auto& layer : net.layers()) {
    const Index count = static_cast<Index>(layer.in) * layer.out;
    for (Index k = 0; k < count; ++k) {
      const T w = params[layer.weight_offset + k];
      total += w * w;
      grad[layer.weight_offset + k] += (2.0 * penalty * weight) * w;
    }
  }
  return penalty * total;
}

}  // namespace djack::internal

#endif  // DJACK_SRC_BACKPROP_H_
