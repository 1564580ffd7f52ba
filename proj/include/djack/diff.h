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

// Exact derivatives of the penalized loss: per-point and mean gradients,
// Hessian-vector products (forward-over-reverse) and a finite-difference
// third-derivative directional term built on exact HVPs.
//
// All data-level quantities use the mean convention: grad_total and the
// full-data HVP are averages over the points in scope.

#ifndef DJACK_DIFF_H_
#define DJACK_DIFF_H_

#include <span>
#include <vector>

#include "djack/model.h"

namespace djack {

class HvpScope {
 public:
  enum class Kind { kSinglePoint, kFullData, kSubsample };

  static HvpScope single_point(Index i) { return HvpScope(Kind::kSinglePoint, {i}); }
  static HvpScope full_data() { return HvpScope(Kind::kFullData, {}); }
  static HvpScope subsample(std::vector<Index> indices) {
    return HvpScope(Kind::kSubsample, std::move(indices));
  }

  Kind kind() const { return kind_; }
  const std::vector<Index>& indices() const { return indices_; }

 private:
  HvpScope(Kind kind, std::vector<Index> indices)
      : kind_(kind), indices_(std::move(indices)) {}
  Kind kind_;
  std::vector<Index> indices_;
};

GradVector grad_point(const Objective& objective, const ParameterVector& params,
                      std::span<const double> x, double y);

GradVector grad_total(const Objective& objective, const ParameterVector& params,
                      const Dataset& data);

// Mean gradient over data rows `rows`.
GradVector grad_batch(const Objective& objective, const ParameterVector& params,
                      const Dataset& data, std::span<const Index> rows);

GradVector hvp_point(const Objective& objective, const ParameterVector& params,
                     std::span<const double> x, double y, const Vector& v);

// Mean Hessian over the scope times v. Throws UsageError for an empty scope
// or out-of-range indices.
GradVector hvp(const Objective& objective, const ParameterVector& params,
               const Dataset& data, const HvpScope& scope, const Vector& v);

// (d^3 L)[u, w] by central differences of exact full-data HVPs along u with
// step h = max(1e-4, 1e-4 * ||params|| / ||u||). Zero when u = 0.
GradVector third_directional(const Objective& objective,
                             const ParameterVector& params, const Dataset& data,
                             const Vector& u, const Vector& w);

}  // namespace djack

#endif  // DJACK_DIFF_H_
