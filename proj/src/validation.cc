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

#include "djack/validation.h"

#include <algorithm>
#include <cmath>

#include "djack/error.h"
#include "djack/oracle.h"
#include "djack/rng.h"
#include "djack/parallel.h"

namespace djack {

Dataset ridge_data(const RidgeCheckConfig& config) {
  if (config.n <= config.dim || config.dim < 1) {
    throw UsageError("ridge check needs n > d >= 1");
  }
  Rng rng(config.seed);
  Dataset data;
  data.features.resize(config.n, config.dim);
  data.targets.resize(config.n);
  for (Index i = 0; i < config.n; ++i) {
    double y = 0.5;
    for (int j = 0; j < config.dim; ++j) {
      data.features(i, j) = rng.normal();
      y += data.features(i, j) / (j + 1.0);
    }
    data.targets(i) = y + config.noise_sd * rng.normal();
  }
  data.name = "ridge";
  return data;
}

RidgeCheck ridge_influence_check(const RidgeCheckConfig& config) {
  const Dataset data = ridge_data(config);
  const RidgeLoo exact = ridge_loo_closed_form(data, config.lambda);
  const ModelSpec spec = ridge_spec(config.dim, config.lambda);

  EnsembleConfig ensemble;
  ensemble.order = 1;
  ensemble.inverse.mode = InverseHvpMode::kDenseDirect;
  ensemble.inverse.damping = 0.0;
  const LooEnsemble loo = build_loo_ensemble(spec, exact.params, data, ensemble);

  RidgeCheck out;
  out.n = config.n;
  for (Index i = 0; i < config.n; ++i) {
    const double err = std::abs(loo.residuals[static_cast<std::size_t>(i)] -
                                exact.loo_residuals(i));
    out.max_abs_error = std::max(out.max_abs_error, err);
    out.mean_abs_error += err / static_cast<double>(config.n);
  }
  const double mean = data.targets.mean();
  out.target_sd = std::sqrt((data.targets.array() - mean).square().sum() /
                            static_cast<double>(config.n - 1));
  out.relative = out.max_abs_error / out.target_sd;
  return out;
}

double loglog_slope(const std::vector<double>& n,
                    const std::vector<double>& error) {
  if (n.size() != error.size() || n.size() < 2) {
    throw UsageError("slope needs at least two (n, error) pairs");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (!(error[k] > 0.0) || !(n[k] > 0.0)) {
      throw NumericalError("non-positive value: slope undefined");
    }
    const double x = std::log(n[k]);
    const double y = std::log(error[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RetrainCheck retrain_check(const Dataset& data, const RetrainCheckConfig& config) {
  data.validate();
  ModelSpec spec = config.spec;
  spec.input_dim = static_cast<int>(data.dim());
  const Index n = data.size();
  if (n < 3) throw UsageError("retrain check needs n >= 3");

  const TrainResult fit = train(spec, data, config.train);
  const Objective objective(spec, n);
  const InverseHvp inverse(objective, fit.params, data, config.inverse);
  const Network& net = objective.net();

  RetrainCheck out;
  const auto un = static_cast<std::size_t>(n);
  out.first_order.resize(un);
  out.second_order.resize(un);
  out.second_order_alg1.resize(un);
  out.retrain_shift.resize(un);
  out.retrain_residuals.resize(un);
  out.grad_norm = fit.final_grad_norm;

  parallel_for(n, config.threads, [&](Index i) {
    const auto k = static_cast<std::size_t>(i);
    const ParameterVector retrained = exact_loo_retrain(spec, data, i, config.train);
    const InfluenceRecord record =
        compute_influence(inverse, objective, fit.params, data, i, 2, config.mode);
    out.first_order[k] = (loo_params(fit.params, record, n, 1) - retrained).norm();
    out.second_order[k] =
        (loo_params(fit.params, record, n, 2, SignConvention::kVonMises) - retrained)
            .norm();
    out.second_order_alg1[k] =
        (loo_params(fit.params, record, n, 2, SignConvention::kAlgorithm1) -
         retrained)
            .norm();
    out.retrain_shift[k] = (retrained - fit.params).norm();
    out.retrain_residuals[k] =
        std::abs(data.targets(i) - net.predict(retrained, data.row(i)));
  });

  out.median_first = median(out.first_order);
  out.median_second = median(out.second_order);
  out.median_alg1 = median(out.second_order_alg1);
  for (std::size_t k = 0; k < un; ++k) {
    if (out.retrain_shift[k] > 0.0) {
      out.max_relative_first = std::max(out.max_relative_first,
                                        out.first_order[k] / out.retrain_shift[k]);
      out.max_relative_second = std::max(
          out.max_relative_second, out.second_order[k] / out.retrain_shift[k]);
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const RidgeCheck& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["max_abs_error"] = c.max_abs_error;
  j["mean_abs_error"] = c.mean_abs_error;
  j["target_sd"] = c.target_sd;
  j["relative_error"] = c.relative;
  return j;
}

nlohmann::ordered_json to_json(const RetrainCheck& c) {
  nlohmann::ordered_json j;
  j["median_error_m1"] = c.median_first;
  j["median_error_m2"] = c.median_second;
  j["median_error_m2_alg1"] = c.median_alg1;
  j["max_relative_error_m1"] = c.max_relative_first;
  j["max_relative_error_m2"] = c.max_relative_second;
  j["fit_grad_norm"] = c.grad_norm;
  j["error_m1"] = c.first_order;
  j["error_m2"] = c.second_order;
  j["error_m2_alg1"] = c.second_order_alg1;
  j["retrain_shift"] = c.retrain_shift;
  j["retrain_residuals"] = c.retrain_residuals;
  return j;
}

}  // namespace djack
