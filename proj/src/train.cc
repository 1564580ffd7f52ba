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

#include <algorithm>
#include <cmath>
#include <optional>

#include "djack/diff.h"
#include "djack/error.h"
#include "djack/model.h"
#include "djack/oracle.h"
#include "djack/rng.h"

namespace djack {
namespace {

// Saddle-free damped Newton with backtracking on the full objective.
void newton_polish(const Objective& objective, const Dataset& data, int steps,
                   ParameterVector& params) {
  // Levenberg-Marquardt on |eigenvalues| (saddle-free): mu shrinks after an
  // accepted step and grows after a rejected one.
  double loss = loss_total(objective, params, data);
  double mu = 1e-4;
  for (int s = 0; s < steps; ++s) {
    const GradVector g = grad_total(objective, params, data);
    if (g.norm() < 1e-13) return;
    const Matrix h = dense_hessian(objective, params, data);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Vector abs_lambda = eig.eigenvalues().cwiseAbs();
    const Vector rotated = eig.eigenvectors().transpose() * g;
    bool improved = false;
    for (int k = 0; k < 30 && !improved; ++k) {
      const Vector inv = (abs_lambda.array() + mu).inverse().matrix();
      const ParameterVector trial =
          params - eig.eigenvectors() * inv.cwiseProduct(rotated);
      const double trial_loss = loss_total(objective, trial, data);
      if (std::isfinite(trial_loss) && trial_loss <= loss) {
        improved = trial_loss < loss || (trial - params).norm() > 0.0;
        params = trial;
        loss = trial_loss;
        mu = std::max(mu * 0.1, 1e-15);
      } else {
        mu *= 10.0;
      }
    }
    if (!improved) return;
  }
}

TrainResult run_training(const ModelSpec& spec, const Dataset& data,
                         const TrainConfig& cfg, std::optional<Index> skip) {
  cfg.validate();
  data.validate();
  if (data.dim() != spec.input_dim) {
    throw UsageError("dataset dimension does not match the model input_dim");
  }
  const Index n = data.size();
  const Objective objective(spec, n);
  const Dataset active = skip ? data.without(*skip) : data;

  TrainResult result;
  ParameterVector params = init_model(spec, cfg.seed);
  result.initial_loss = loss_total(objective, params, active);

  const Index batch = std::clamp<Index>(cfg.batch_size, 1, n);
  const Index p = params.size();
  Vector m = Vector::Zero(p);
  Vector v = Vector::Zero(p);
  double beta1_power = 1.0;
  double beta2_power = 1.0;
  Rng shuffle(mix_seed(cfg.seed, 1));
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(batch));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = shuffle.permutation(static_cast<std::size_t>(n));
    for (Index start = 0; start < n; start += batch) {
      rows.clear();
      for (Index k = start; k < std::min(n, start + batch); ++k) {
        const auto i = static_cast<Index>(perm[static_cast<std::size_t>(k)]);
        if (!skip || i != *skip) rows.push_back(i);
      }
      if (rows.empty()) continue;
      const GradVector g = grad_batch(objective, params, data, rows);
      beta1_power *= cfg.beta1;
      beta2_power *= cfg.beta2;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
      const double step = cfg.learning_rate * std::sqrt(1.0 - beta2_power) /
                          (1.0 - beta1_power);
      params.array() -=
          step * m.array() /
          (v.array().sqrt() + cfg.epsilon * std::sqrt(1.0 - beta2_power));
    }
    if (!params.allFinite() ||
        !std::isfinite(loss_total(objective, params, active))) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch + 1));
    }
  }
  if (cfg.polish_steps > 0) {
    newton_polish(objective, active, cfg.polish_steps, params);
  }
  result.final_loss = loss_total(objective, params, active);
  result.final_grad_norm = grad_total(objective, params, active).norm();
  result.params = std::move(params);
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (batch_size < 1) throw UsageError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw UsageError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw UsageError("Adam epsilon must be positive");
  if (polish_steps < 0) throw UsageError("polish_steps must be >= 0");
}

TrainResult train(const ModelSpec& spec, const Dataset& data,
                  const TrainConfig& cfg) {
  return run_training(spec, data, cfg, std::nullopt);
}

TrainResult train_without(const ModelSpec& spec, const Dataset& data,
                          const TrainConfig& cfg, Index skip) {
  if (skip < 0 || skip >= data.size()) throw UsageError("skip index out of range");
  if (data.size() < 2) throw UsageError("cannot drop the only training point");
  return run_training(spec, data, cfg, skip);
}

}  // namespace djack
