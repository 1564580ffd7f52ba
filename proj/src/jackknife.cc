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

#include "djack/jackknife.h"

#include <algorithm>

#include "djack/error.h"

namespace djack {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
}

double kth_smallest(std::vector<double> values, Index k) {
  const auto kk = static_cast<std::size_t>(k - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(kk),
                   values.end());
  return values[kk];
}

PredictionInterval make_interval(double lower, double upper, double center,
                                 double alpha) {
  PredictionInterval out;
  out.lower = lower;
  out.upper = upper;
  out.center = center;
  out.width = upper - lower;
  out.alpha = alpha;
  return out;
}

}  // namespace

Index quantile_rank(Index n, double alpha) {
  check_alpha(alpha);
  return static_cast<Index>(
      std::ceil((1.0 - alpha) * static_cast<double>(n + 1) - 1e-9));
}

double quantile_plus(std::span<const double> values, double alpha) {
  if (values.empty()) throw UsageError("quantile of an empty set");
  const auto n = static_cast<Index>(values.size());
  const Index k = std::max<Index>(quantile_rank(n, alpha), 1);
  if (k > n) return kInfinity;
  return kth_smallest({values.begin(), values.end()}, k);
}

double quantile_minus(std::span<const double> values, double alpha) {
  std::vector<double> negated(values.size());
  std::transform(values.begin(), values.end(), negated.begin(),
                 [](double v) { return -v; });
  return -quantile_plus(negated, alpha);
}

PredictionInterval jackknife_plus(double center,
                                  std::span<const double> loo_predictions,
                                  std::span<const double> residuals,
                                  double alpha) {
  if (loo_predictions.size() != residuals.size()) {
    throw UsageError("prediction and residual counts differ");
  }
  std::vector<double> lower_set(residuals.size());
  std::vector<double> upper_set(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    lower_set[i] = loo_predictions[i] - residuals[i];
    upper_set[i] = loo_predictions[i] + residuals[i];
  }
  return make_interval(quantile_minus(lower_set, alpha),
                       quantile_plus(upper_set, alpha), center, alpha);
}

PredictionInterval naive_jackknife(double center,
                                   std::span<const double> residuals,
                                   double alpha) {
  const double q = quantile_plus(residuals, alpha);
  PredictionInterval out = make_interval(center - q, center + q, center, alpha);
  // Exactly 2q at every x, so widths tie without rounding noise.
  out.width = 2.0 * q;
  return out;
}

bool width_bound_holds(const PredictionInterval& interval,
                       std::span<const double> residuals,
                       std::span<const double> variability, double alpha) {
  const double bound = 2.0 * quantile_plus(residuals, alpha) +
                       std::abs(quantile_plus(variability, alpha)) +
                       std::abs(quantile_minus(variability, alpha));
  if (!std::isfinite(bound)) return true;
  return interval.width <= bound + 1e-12 * std::max(1.0, bound);
}

std::vector<double> loo_predictions(const LooEnsemble& ensemble,
                                    std::span<const double> x) {
  const Network net(ensemble.spec);
  std::vector<double> out;
  out.reserve(ensemble.loo_params.size());
  for (const auto& theta : ensemble.loo_params) out.push_back(net.predict(theta, x));
  return out;
}

std::vector<double> variability_set(const LooEnsemble& ensemble,
                                    std::span<const double> x) {
  const double center = Network(ensemble.spec).predict(ensemble.base, x);
  auto values = loo_predictions(ensemble, x);
  for (auto& v : values) v = center - v;
  return values;
}

PredictionInterval dj_interval(const LooEnsemble& ensemble,
                               std::span<const double> x, double alpha) {
  const double center = Network(ensemble.spec).predict(ensemble.base, x);
  return jackknife_plus(center, loo_predictions(ensemble, x), ensemble.residuals,
                        alpha);
}

PredictionInterval naive_jackknife_interval(const LooEnsemble& ensemble,
                                            std::span<const double> x,
                                            double alpha) {
  const double center = Network(ensemble.spec).predict(ensemble.base, x);
  return naive_jackknife(center, ensemble.residuals, alpha);
}

bool width_bound_check(const LooEnsemble& ensemble, std::span<const double> x,
                       double alpha) {
  return width_bound_holds(dj_interval(ensemble, x, alpha), ensemble.residuals,
                           variability_set(ensemble, x), alpha);
}

PredictionInterval to_original_units(const PredictionInterval& interval,
                                     const Standardization& scaling) {
  PredictionInterval out = make_interval(
      scaling.target_to_original(interval.lower),
      scaling.target_to_original(interval.upper),
      scaling.target_to_original(interval.center), interval.alpha);
  out.width = interval.width * scaling.target_scale;
  return out;
}

}  // namespace djack
