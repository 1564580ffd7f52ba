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

#include "djack/influence.h"

#include <cmath>
#include <functional>

#include "djack/diff.h"
#include "djack/error.h"
#include "djack/rng.h"
#include "djack/parallel.h"

namespace djack {
namespace {

constexpr std::uint64_t kSecondOrderStream = 1ULL << 63;

double rayleigh_power(const std::function<Vector(const Vector&)>& op, Vector x,
                      int iterations) {
  x.normalize();
  double estimate = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Vector y = op(x);
    estimate = x.dot(y);
    const double norm = y.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    x = y / norm;
  }
  return estimate;
}

}  // namespace

std::string to_string(InverseHvpMode mode) {
  return mode == InverseHvpMode::kDenseDirect ? "dense" : "stochastic";
}
std::string to_string(SecondOrderMode mode) {
  return mode == SecondOrderMode::kMainText ? "main_text" : "full";
}
std::string to_string(SignConvention signs) {
  return signs == SignConvention::kVonMises ? "a8" : "alg1";
}

InverseHvpMode parse_inverse_hvp_mode(const std::string& text) {
  if (text == "dense") return InverseHvpMode::kDenseDirect;
  if (text == "stochastic") return InverseHvpMode::kStochasticNeumann;
  throw UsageError("unknown inverse-HVP mode '" + text + "' (dense|stochastic)");
}
SecondOrderMode parse_second_order_mode(const std::string& text) {
  if (text == "main_text") return SecondOrderMode::kMainText;
  if (text == "full") return SecondOrderMode::kFull;
  throw UsageError("unknown second-order mode '" + text + "' (main_text|full)");
}
SignConvention parse_sign_convention(const std::string& text) {
  if (text == "a8") return SignConvention::kVonMises;
  if (text == "alg1") return SignConvention::kAlgorithm1;
  throw UsageError("unknown sign convention '" + text + "' (a8|alg1)");
}

void InverseHvpConfig::validate() const {
  if (recursion_depth < 1) throw UsageError("recursion depth must be >= 1");
  if (subsample_size < 0) throw UsageError("subsample size must be >= 0");
  if (!(damping >= 0.0)) throw UsageError("damping must be >= 0");
  if (!(scale >= 0.0)) throw UsageError("scale must be positive (or 0 for auto)");
  if (repeats < 1) throw UsageError("repeats must be >= 1");
  if (power_iterations < 1) throw UsageError("power iterations must be >= 1");
}

InverseHvp::InverseHvp(const Objective& objective, const ParameterVector& params,
                       const Dataset& data, const InverseHvpConfig& config)
    : config_(config), objective_(objective) {
  config_.validate();
  objective.net().check_params(params);
  if (data.size() == 0) throw UsageError("inverse HVP over an empty dataset");
  if (config_.mode == InverseHvpMode::kDenseDirect) {
    factor_dense(dense_hessian(objective, params, data, config_.max_dense_params));
  } else {
    params_ = params;
    data_ = data;
    estimate_spectrum();
  }
}

InverseHvp InverseHvp::from_matrix(const Matrix& hessian, double damping) {
  if (hessian.rows() != hessian.cols()) throw UsageError("Hessian must be square");
  InverseHvp out;
  out.config_.mode = InverseHvpMode::kDenseDirect;
  out.config_.damping = damping;
  out.config_.validate();
  out.factor_dense(0.5 * (hessian + hessian.transpose()));
  return out;
}

void InverseHvp::factor_dense(const Matrix& hessian) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("Hessian eigendecomposition failed");
  }
  Vector lambda = eig.eigenvalues();
  lambda_min_ = lambda.minCoeff() + config_.damping;
  lambda_max_ = lambda.maxCoeff() + config_.damping;
  clamped_ = 0;
  for (Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) < 0.0) {
      lambda(k) = 0.0;
      ++clamped_;
    }
  }
  lambda.array() += config_.damping;
  if (!(lambda.minCoeff() > 0.0)) {
    throw NumericalError("Hessian is singular; use a positive damping");
  }
  eigenvectors_ = eig.eigenvectors();
  inverse_eigenvalues_ = lambda.cwiseInverse();
}

void InverseHvp::estimate_spectrum() {
  const Index p = params_.size();
  const auto scope = HvpScope::full_data();
  const auto damped = [&](const Vector& v) -> Vector {
    return hvp(*objective_, params_, data_, scope, v) + config_.damping * v;
  };
  Rng rng(mix_seed(config_.seed, 0x5eed));
  Vector start(p);
  for (Index k = 0; k < p; ++k) start(k) = rng.normal();

  const double dominant = rayleigh_power(damped, start, config_.power_iterations);
  if (!(dominant > 0.0)) {
    throw NumericalError(
        "power iteration found negative leading curvature (" +
        std::to_string(dominant) + "); increase the damping");
  }
  lambda_max_ = dominant;
  const auto shifted = [&](const Vector& v) -> Vector {
    return dominant * v - damped(v);
  };
  lambda_min_ = dominant - rayleigh_power(shifted, start, config_.power_iterations);
  if (lambda_min_ < 0.0) {
    throw NumericalError("damped Hessian is indefinite (eigenvalue estimate " +
                         std::to_string(lambda_min_) +
                         "); increase the damping");
  }
  scale_ = config_.scale > 0.0 ? config_.scale : 0.9 / lambda_max_;
}

Vector InverseHvp::apply(const Vector& w, std::uint64_t stream) const {
  if (config_.mode == InverseHvpMode::kDenseDirect) {
    if (w.size() != eigenvectors_.rows()) {
      throw UsageError("inverse HVP direction has the wrong length");
    }
    return eigenvectors_ *
           inverse_eigenvalues_.cwiseProduct(eigenvectors_.transpose() * w);
  }
  if (w.size() != params_.size()) {
    throw UsageError("inverse HVP direction has the wrong length");
  }
  const Index n = data_.size();
  const Index sample =
      config_.subsample_size > 0 ? std::min(config_.subsample_size, n)
                                 : std::min<Index>(n, 32);
  Vector total = Vector::Zero(w.size());
  for (int r = 0; r < config_.repeats; ++r) {
    Rng rng(mix_seed(config_.seed ^ stream, static_cast<std::uint64_t>(r)));
    Vector h = w;
    for (int j = 0; j < config_.recursion_depth; ++j) {
      HvpScope scope = HvpScope::full_data();
      if (sample < n) {
        auto perm = rng.permutation(static_cast<std::size_t>(n));
        std::vector<Index> rows(perm.begin(), perm.begin() + sample);
        scope = HvpScope::subsample(std::move(rows));
      }
      const Vector hh =
          hvp(*objective_, params_, data_, scope, h) + config_.damping * h;
      h = w + h - scale_ * hh;
      if (!h.allFinite()) {
        throw NumericalError("Neumann recursion diverged at step " +
                             std::to_string(j + 1) + "; increase the damping");
      }
    }
    total += scale_ * h;
  }
  return total / static_cast<double>(config_.repeats);
}

Vector inverse_hvp(const Objective& objective, const ParameterVector& params,
                   const Dataset& data, const Vector& w,
                   const InverseHvpConfig& config) {
  return InverseHvp(objective, params, data, config).apply(w);
}

GradVector influence_first(const InverseHvp& inverse, const Objective& objective,
                           const ParameterVector& params, const Dataset& data,
                           Index i) {
  if (i < 0 || i >= data.size()) throw UsageError("influence index out of range");
  const GradVector g = grad_point(objective, params, data.row(i), data.targets(i));
  return -inverse.apply(g, static_cast<std::uint64_t>(i));
}

GradVector influence_second(const InverseHvp& inverse,
                            const Objective& objective,
                            const ParameterVector& params, const Dataset& data,
                            Index i, const GradVector& first,
                            SecondOrderMode mode) {
  if (i < 0 || i >= data.size()) throw UsageError("influence index out of range");
  Vector w = 2.0 * hvp_point(objective, params, data.row(i), data.targets(i), first);
  if (mode == SecondOrderMode::kFull) {
    // d^3 L is linear in each slot; difference along the unit direction.
    const double norm = first.norm();
    if (norm > 0.0) {
      w += norm * third_directional(objective, params, data, first / norm, first);
    }
  }
  return -inverse.apply(w, static_cast<std::uint64_t>(i) ^ kSecondOrderStream);
}

InfluenceRecord compute_influence(const InverseHvp& inverse,
                                  const Objective& objective,
                                  const ParameterVector& params,
                                  const Dataset& data, Index i, int order,
                                  SecondOrderMode mode) {
  if (order != 1 && order != 2) throw UsageError("influence order must be 1 or 2");
  InfluenceRecord record;
  record.index = i;
  record.mode = mode;
  record.first_order = influence_first(inverse, objective, params, data, i);
  if (order == 2) {
    record.second_order = influence_second(inverse, objective, params, data, i,
                                           record.first_order, mode);
  }
  return record;
}

ParameterVector loo_params(const ParameterVector& base,
                           const InfluenceRecord& record, Index n, int order,
                           SignConvention signs) {
  if (order != 1 && order != 2) throw UsageError("order must be 1 or 2");
  if (n < 1) throw UsageError("n must be positive");
  const double inv_n = 1.0 / static_cast<double>(n);
  ParameterVector out = base - inv_n * record.first_order;
  if (order == 2) {
    if (!record.second_order) {
      throw UsageError("second-order influence missing for order 2");
    }
    const double sign = signs == SignConvention::kVonMises ? 1.0 : -1.0;
    out += sign * 0.5 * inv_n * inv_n * *record.second_order;
  }
  return out;
}

LooEnsemble build_loo_ensemble(const ModelSpec& spec,
                               const ParameterVector& params,
                               const Dataset& data,
                               const EnsembleConfig& config) {
  data.validate();
  if (config.order != 1 && config.order != 2) {
    throw UsageError("influence order must be 1 or 2");
  }
  const Objective objective(spec, data.size());
  const InverseHvp inverse(objective, params, data, config.inverse);
  const Index n = data.size();

  LooEnsemble ensemble;
  ensemble.spec = spec;
  ensemble.base = params;
  ensemble.order = config.order;
  ensemble.mode = config.mode;
  ensemble.signs = config.signs;
  ensemble.inverse_mode = config.inverse.mode;
  ensemble.damping = config.inverse.damping;
  ensemble.clamped_eigenvalues = inverse.clamped_eigenvalues();
  ensemble.degenerate = n <= 2;
  ensemble.loo_params.resize(static_cast<std::size_t>(n));
  ensemble.residuals.resize(static_cast<std::size_t>(n));

  parallel_for(n, config.threads, [&](Index i) {
    const auto record = compute_influence(inverse, objective, params, data, i,
                                          config.order, config.mode);
    auto theta = loo_params(params, record, n, config.order, config.signs);
    const double r =
        std::abs(data.targets(i) - objective.net().predict(theta, data.row(i)));
    if (!std::isfinite(r)) {
      throw NumericalError("non-finite leave-one-out residual for point " +
                           std::to_string(i));
    }
    ensemble.loo_params[static_cast<std::size_t>(i)] = std::move(theta);
    ensemble.residuals[static_cast<std::size_t>(i)] = r;
  });
  return ensemble;
}

}  // namespace djack
