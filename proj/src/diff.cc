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

#include "djack/diff.h"

#include <algorithm>
#include <cmath>

#include "backprop.h"
#include "djack/error.h"

namespace djack {
namespace {

using internal::Dual;

void check_data(const Network& net, const Dataset& data) {
  if (data.dim() != net.spec().input_dim) {
    throw UsageError("dataset dimension does not match the network");
  }
}

void check_direction(const Network& net, const Vector& v) {
  if (v.size() != net.param_count()) {
    throw UsageError("direction has length " + std::to_string(v.size()) +
                     ", network expects " + std::to_string(net.param_count()));
  }
}

// Mean gradient over `rows`, penalty included.
template <typename Rows>
GradVector mean_gradient(const Objective& objective, const ParameterVector& params,
                         const Dataset& data, const Rows& rows) {
  const auto& net = objective.net();
  net.check_params(params);
  check_data(net, data);
  GradVector grad = GradVector::Zero(net.param_count());
  internal::Workspace<double> ws;
  const double weight = 1.0 / static_cast<double>(rows.size());
  for (const Index i : rows) {
    internal::accumulate_point(net, params.data(), data.row(i), data.targets(i),
                               weight, grad.data(), ws);
  }
  internal::accumulate_penalty(net, params.data(), objective.penalty(), 1.0,
                               grad.data());
  return objective.loss_scale() * grad;
}

template <typename Rows>
GradVector mean_hvp(const Objective& objective, const ParameterVector& params,
                    const Dataset& data, const Rows& rows, const Vector& v) {
  const auto& net = objective.net();
  const Index p = net.param_count();
  std::vector<Dual> theta(static_cast<std::size_t>(p));
  for (Index k = 0; k < p; ++k) theta[static_cast<std::size_t>(k)] = {params(k), v(k)};
  std::vector<Dual> grad(static_cast<std::size_t>(p));
  internal::Workspace<Dual> ws;
  const double weight = 1.0 / static_cast<double>(rows.size());
  for (const Index i : rows) {
    internal::accumulate_point(net, theta.data(), data.row(i), data.targets(i),
                               weight, grad.data(), ws);
  }
  internal::accumulate_penalty(net, theta.data(), objective.penalty(), 1.0,
                               grad.data());
  GradVector out(p);
  for (Index k = 0; k < p; ++k) out(k) = grad[static_cast<std::size_t>(k)].d;
  return objective.loss_scale() * out;
}

struct AllRows {
  Index n;
  struct Iter {
    Index i;
    Index operator*() const { return i; }
    Iter& operator++() {
      ++i;
      return *this;
    }
    bool operator!=(const Iter& o) const { return i != o.i; }
  };
  Iter begin() const { return {0}; }
  Iter end() const { return {n}; }
  std::size_t size() const { return static_cast<std::size_t>(n); }
};

}  // namespace

GradVector grad_point(const Objective& objective, const ParameterVector& params,
                      std::span<const double> x, double y) {
  const auto& net = objective.net();
  net.check_params(params);
  net.check_input(x);
  GradVector grad = GradVector::Zero(net.param_count());
  internal::Workspace<double> ws;
  internal::accumulate_point(net, params.data(), x, y, 1.0, grad.data(), ws);
  internal::accumulate_penalty(net, params.data(), objective.penalty(), 1.0,
                               grad.data());
  return objective.loss_scale() * grad;
}

GradVector grad_total(const Objective& objective, const ParameterVector& params,
                      const Dataset& data) {
  if (data.size() == 0) throw UsageError("grad_total on an empty dataset");
  return mean_gradient(objective, params, data, AllRows{data.size()});
}

GradVector grad_batch(const Objective& objective, const ParameterVector& params,
                      const Dataset& data, std::span<const Index> rows) {
  if (rows.empty()) throw UsageError("grad_batch on an empty batch");
  return mean_gradient(objective, params, data, rows);
}

GradVector hvp_point(const Objective& objective, const ParameterVector& params,
                     std::span<const double> x, double y, const Vector& v) {
  const auto& net = objective.net();
  net.check_params(params);
  net.check_input(x);
  check_direction(net, v);
  Dataset single;
  single.features = Eigen::Map<const FeatureMatrix>(x.data(), 1,
                                                    static_cast<Index>(x.size()));
  single.targets = Vector::Constant(1, y);
  return mean_hvp(objective, params, single, AllRows{1}, v);
}

GradVector hvp(const Objective& objective, const ParameterVector& params,
               const Dataset& data, const HvpScope& scope, const Vector& v) {
  const auto& net = objective.net();
  net.check_params(params);
  check_direction(net, v);
  check_data(net, data);
  if (scope.kind() == HvpScope::Kind::kFullData) {
    if (data.size() == 0) throw UsageError("hvp over an empty dataset");
    return mean_hvp(objective, params, data, AllRows{data.size()}, v);
  }
  const auto& rows = scope.indices();
  if (rows.empty()) throw UsageError("hvp over an empty scope");
  for (const Index i : rows) {
    if (i < 0 || i >= data.size()) throw UsageError("hvp scope index out of range");
  }
  return mean_hvp(objective, params, data, rows, v);
}

GradVector third_directional(const Objective& objective,
                             const ParameterVector& params, const Dataset& data,
                             const Vector& u, const Vector& w) {
  check_direction(objective.net(), u);
  check_direction(objective.net(), w);
  const double unorm = u.norm();
  if (unorm == 0.0) return GradVector::Zero(params.size());
  const double h = std::max(1e-4, 1e-4 * params.norm() / unorm);
  const ParameterVector plus = params + h * u;
  const ParameterVector minus = params - h * u;
  const auto scope = HvpScope::full_data();
  return (hvp(objective, plus, data, scope, w) -
          hvp(objective, minus, data, scope, w)) /
         (2.0 * h);
}

}  // namespace djack
