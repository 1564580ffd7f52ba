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

// Oracle comparisons for the influence approximation: closed-form ridge
// leave-one-out and small-network retraining.

#ifndef DJACK_VALIDATION_H_
#define DJACK_VALIDATION_H_

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "djack/data.h"
#include "djack/influence.h"
#include "djack/model.h"

namespace djack {

struct RidgeCheckConfig {
  Index n = 200;
  int dim = 5;
  double lambda = 1.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

// y = x . beta + 0.5 + noise with x ~ N(0, I_d) and beta_j = 1 / (j + 1).
Dataset ridge_data(const RidgeCheckConfig& config);

struct RidgeCheck {
  Index n = 0;
  double max_abs_error = 0.0;  // max_i |influence LOO residual - hat-matrix one|
  double mean_abs_error = 0.0;
  double target_sd = 0.0;
  double relative = 0.0;  // max_abs_error / target_sd
};

// First-order (m = 1) influence residuals, dense inverse without damping, at
// the exact ridge optimum.
RidgeCheck ridge_influence_check(const RidgeCheckConfig& config);

// Least-squares slope of log(error) against log(n).
double loglog_slope(const std::vector<double>& n,
                    const std::vector<double>& error);

struct RetrainCheckConfig {
  ModelSpec spec;         // input_dim is taken from the data
  TrainConfig train;      // shared by the full run and every retrain
  InverseHvpConfig inverse;
  SecondOrderMode mode = SecondOrderMode::kFull;
  int threads = 1;
};

struct RetrainCheck {
  // Per training index: ||theta_-i^approx - theta_-i^retrain||.
  std::vector<double> first_order;
  std::vector<double> second_order;        // von Mises signs
  std::vector<double> second_order_alg1;   // uniform minus signs
  std::vector<double> retrain_shift;       // ||theta_-i^retrain - theta||
  std::vector<double> retrain_residuals;   // |y_i - f(x_i; theta_-i^retrain)|
  double median_first = 0.0;
  double median_second = 0.0;
  double median_alg1 = 0.0;
  double max_relative_first = 0.0;   // max_i error_i / retrain_shift_i
  double max_relative_second = 0.0;
  double grad_norm = 0.0;  // of the full-data fit
};

RetrainCheck retrain_check(const Dataset& data, const RetrainCheckConfig& config);

double median(std::vector<double> values);

nlohmann::ordered_json to_json(const RidgeCheck& check);
nlohmann::ordered_json to_json(const RetrainCheck& check);

}  // namespace djack

#endif  // DJACK_VALIDATION_H_
