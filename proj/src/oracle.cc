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

#include "djack/oracle.h"

#include <cmath>

#include "djack/diff.h"
#include "djack/error.h"

namespace djack {
namespace {

Matrix augmented_design(const Dataset& data) {
  Matrix x(data.size(), data.dim() + 1);
  x.leftCols(data.dim()) = data.features;
  x.col(data.dim()).setOnes();
  return x;
}

Matrix penalized_gram(const Matrix& x, double lambda) {
  Matrix gram = x.transpose() * x;
  for (Index j = 0; j + 1 < gram.rows(); ++j) gram(j, j) += lambda;
  return gram;
}

Eigen::LDLT<Matrix> factor(const Matrix& gram) {
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.rcond() < 1e-13) {
    throw NumericalError("ridge normal equations are singular");
  }
  return ldlt;
}

}  // namespace

Matrix dense_hessian(const Objective& objective, const ParameterVector& params,
                     const Dataset& data, Index max_params) {
  const Index p = objective.net().param_count();
  if (p > max_params) {
    throw UsageError("dense Hessian needs p <= " + std::to_string(max_params) +
                     " (p = " + std::to_string(p) + ")");
  }
  Matrix h(p, p);
  Vector unit = Vector::Zero(p);
  const auto scope = HvpScope::full_data();
  for (Index j = 0; j < p; ++j) {
    unit(j) = 1.0;
    h.col(j) = hvp(objective, params, data, scope, unit);
    unit(j) = 0.0;
  }
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (asym > 1e-8 * scale) {
    throw NumericalError("Hessian asymmetry " + std::to_string(asym) +
                         " exceeds tolerance");
  }
  return 0.5 * (h + h.transpose());
}

ModelSpec ridge_spec(int input_dim, double lambda) {
  ModelSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_layers.clear();
  spec.l2_penalty = lambda;
  return spec;
}

RidgeLoo ridge_loo_closed_form(const Dataset& data, double lambda) {
  data.validate();
  if (data.size() <= data.dim()) throw UsageError("ridge LOO needs n > d");
  if (!(lambda >= 0.0)) throw UsageError("ridge lambda must be >= 0");
  const Matrix x = augmented_design(data);
  const auto ldlt = factor(penalized_gram(x, lambda));
  RidgeLoo out;
  out.params = ldlt.solve(x.transpose() * data.targets);
  out.residuals = data.targets - x * out.params;
  const Matrix solved = ldlt.solve(x.transpose());  // (X'X + L)^-1 X'
  out.leverage = (x.array() * solved.transpose().array()).rowwise().sum();
  out.loo_residuals.resize(data.size());
  for (Index i = 0; i < data.size(); ++i) {
    const double denom = 1.0 - out.leverage(i);
    if (!(denom > 0.0)) throw NumericalError("leverage reached 1");
    out.loo_residuals(i) = std::abs(out.residuals(i)) / denom;
  }
  return out;
}

ParameterVector ridge_fit(const Dataset& data, double lambda) {
  data.validate();
  const Matrix x = augmented_design(data);
  return factor(penalized_gram(x, lambda)).solve(x.transpose() * data.targets);
}

ParameterVector ridge_refit_without(const Dataset& data, double lambda, Index i) {
  return ridge_fit(data.without(i), lambda);
}

ParameterVector exact_loo_retrain(const ModelSpec& spec, const Dataset& data,
                                  Index i, const TrainConfig& cfg) {
  if (data.size() < 2) throw UsageError("LOO retraining needs n >= 2");
  return train_without(spec, data, cfg, i).params;
}

}  // namespace djack
