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

// Naive jackknife and discriminative jackknife (jackknife+) intervals.

#ifndef DJACK_JACKKNIFE_H_
#define DJACK_JACKKNIFE_H_

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "djack/influence.h"

namespace djack {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// The ceil((1 - alpha)(n + 1))-th smallest value, counting duplicates; +inf
// when that rank exceeds n. The rank is computed with a 1e-9 guard so that
// exact products such as 0.8 * 5 are not pushed up by rounding.
double quantile_plus(std::span<const double> values, double alpha);

// Lower counterpart: -quantile_plus(-values, alpha), i.e. the
// (n + 1 - k)-th smallest value; -inf on rank overflow.
double quantile_minus(std::span<const double> values, double alpha);

// Order-statistic rank used by quantile_plus (may exceed n).
Index quantile_rank(Index n, double alpha);

struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double center = 0.0;
  double width = 0.0;
  double alpha = 0.1;

  bool vacuous() const { return !std::isfinite(lower) || !std::isfinite(upper); }
  bool covers(double y) const { return lower <= y && y <= upper; }
};

// Jackknife+ from leave-one-out predictions f(x; theta_-i) and residuals r_i:
// [Q-({f_-i - r_i}), Q+({f_-i + r_i})].
PredictionInterval jackknife_plus(double center,
                                  std::span<const double> loo_predictions,
                                  std::span<const double> residuals,
                                  double alpha);

// center -/+ Q+(R).
PredictionInterval naive_jackknife(double center,
                                   std::span<const double> residuals,
                                   double alpha);

// 2 Q+(R) + |Q+(V)| + |Q-(V)| >= width. True when the bound is infinite.
bool width_bound_holds(const PredictionInterval& interval,
                       std::span<const double> residuals,
                       std::span<const double> variability, double alpha);

// Ensemble-level operations take x in model units (standardized when the
// ensemble carries a scaling) and return model-unit intervals.
std::vector<double> loo_predictions(const LooEnsemble& ensemble,
                                    std::span<const double> x);

// v_i(x) = f(x; theta) - f(x; theta_-i).
std::vector<double> variability_set(const LooEnsemble& ensemble,
                                    std::span<const double> x);

PredictionInterval dj_interval(const LooEnsemble& ensemble,
                               std::span<const double> x, double alpha);

PredictionInterval naive_jackknife_interval(const LooEnsemble& ensemble,
                                            std::span<const double> x,
                                            double alpha);

bool width_bound_check(const LooEnsemble& ensemble, std::span<const double> x,
                       double alpha);

// Maps a model-unit interval to original target units.
PredictionInterval to_original_units(const PredictionInterval& interval,
                                     const Standardization& scaling);

}  // namespace djack

#endif  // DJACK_JACKKNIFE_H_
