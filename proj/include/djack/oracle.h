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

// Ground truth for judging the influence approximation: dense Hessians,
// closed-form ridge leave-one-out, and exact leave-one-out retraining.

#ifndef DJACK_ORACLE_H_
#define DJACK_ORACLE_H_

#include "djack/model.h"

namespace djack {

inline constexpr Index kDefaultMaxDenseParams = 2000;

// Column j is hvp(e_j); the result is symmetrized after checking that the
// asymmetry is at most 1e-8 relative to the largest entry. Throws UsageError
// when p exceeds max_params.
Matrix dense_hessian(const Objective& objective, const ParameterVector& params,
                     const Dataset& data,
                     Index max_params = kDefaultMaxDenseParams);

// Linear network (no hidden layer) whose penalized loss is ridge regression
// with an unpenalized intercept: n * L = sum (y - w.x - b)^2 + lambda ||w||^2.
ModelSpec ridge_spec(int input_dim, double lambda);

struct RidgeLoo {
  ParameterVector params;  // [w_1 .. w_d, b], linear-network layout
  Vector residuals;        // e_i = y_i - f(x_i)
  Vector leverage;         // h_ii of the penalized hat matrix
  Vector loo_residuals;    // |e_i| / (1 - h_ii)
};

// Solves the penalized normal equations once and applies the hat-matrix
// identity. Requires n > d; throws NumericalError when the system is
// singular beyond tolerance.
RidgeLoo ridge_loo_closed_form(const Dataset& data, double lambda);

ParameterVector ridge_fit(const Dataset& data, double lambda);

// Ridge refit on the data with row i removed (same lambda).
ParameterVector ridge_refit_without(const Dataset& data, double lambda, Index i);

// Warm-comparison leave-one-out retraining: same initialization and batch
// stream as the full-data run, point i skipped. Requires n >= 2.
ParameterVector exact_loo_retrain(const ModelSpec& spec, const Dataset& data,
                                  Index i, const TrainConfig& cfg);

}  // namespace djack

#endif  // DJACK_ORACLE_H_
