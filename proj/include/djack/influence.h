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

// Influence functions and approximate leave-one-out parameters.
//
// With the mean-convention Hessian H of L, removing point i is the
// perturbation eps = -1/n of L + eps * l_i, and
//
//   I1 = -H^-1 grad l_i
//   I2 = -H^-1 (d^3 L [I1, I1] + 2 (hess l_i) I1)     (full)
//   I2 = -H^-1 (2 (hess l_i) I1)                        (main_text)
//   theta_{-i} = theta - I1 / n + I2 / (2 n^2)
//
// H^-1 is applied either through a dense eigendecomposition or through a
// scaled stochastic Neumann recursion.

#ifndef DJACK_INFLUENCE_H_
#define DJACK_INFLUENCE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "djack/data.h"
#include "djack/model.h"
#include "djack/oracle.h"

namespace djack {

enum class InverseHvpMode { kDenseDirect, kStochasticNeumann };
enum class SecondOrderMode { kMainText, kFull };
// kVonMises: alternating signs (-1/n)^k / k!. kAlgorithm1: uniform minus.
enum class SignConvention { kVonMises, kAlgorithm1 };

std::string to_string(InverseHvpMode mode);
std::string to_string(SecondOrderMode mode);
std::string to_string(SignConvention signs);
InverseHvpMode parse_inverse_hvp_mode(const std::string& text);
SecondOrderMode parse_second_order_mode(const std::string& text);
SignConvention parse_sign_convention(const std::string& text);

struct InverseHvpConfig {
  InverseHvpMode mode = InverseHvpMode::kDenseDirect;
  int recursion_depth = 100;
  Index subsample_size = 0;  // 0 selects min(n, 32)
  double damping = 1e-3;
  double scale = 0.0;  // 0 selects 0.9 / (largest eigenvalue estimate)
  int repeats = 4;
  int power_iterations = 20;
  std::uint64_t seed = 0;
  Index max_dense_params = kDefaultMaxDenseParams;

  void validate() const;
};

// Applies (H + damping I)^-1 for one (objective, params, data).
//
// Dense mode eigendecomposes H once; eigenvalues below zero are clamped to
// zero before damping, so the operator is always positive definite when
// damping > 0. Stochastic mode estimates the extreme eigenvalues of the damped
// Hessian by power iteration, refuses an indefinite one, and runs
//   h_j = w + (I - c (H_S + damping I)) h_{j-1},  result c * h_t
// with a fresh subsample S per step, averaged over `repeats` runs.
class InverseHvp {
 public:
  InverseHvp(const Objective& objective, const ParameterVector& params,
             const Dataset& data, const InverseHvpConfig& config);

  // Dense operator for an explicit symmetric matrix.
  static InverseHvp from_matrix(const Matrix& hessian, double damping);

  // `stream` selects the subsampling stream in stochastic mode.
  Vector apply(const Vector& w, std::uint64_t stream = 0) const;

  InverseHvpMode mode() const { return config_.mode; }
  double damping() const { return config_.damping; }
  double scale() const { return scale_; }
  double largest_eigenvalue() const { return lambda_max_; }
  double smallest_eigenvalue() const { return lambda_min_; }
  Index clamped_eigenvalues() const { return clamped_; }

 private:
  InverseHvp() = default;
  void factor_dense(const Matrix& hessian);
  void estimate_spectrum();

  InverseHvpConfig config_;
  std::optional<Objective> objective_;
  ParameterVector params_;
  Dataset data_;
  Matrix eigenvectors_;
  Vector inverse_eigenvalues_;
  double scale_ = 1.0;
  double lambda_max_ = 0.0;
  double lambda_min_ = 0.0;
  Index clamped_ = 0;
};

Vector inverse_hvp(const Objective& objective, const ParameterVector& params,
                   const Dataset& data, const Vector& w,
                   const InverseHvpConfig& config);

struct InfluenceRecord {
  Index index = 0;
  GradVector first_order;
  std::optional<GradVector> second_order;
  SecondOrderMode mode = SecondOrderMode::kFull;
};

GradVector influence_first(const InverseHvp& inverse, const Objective& objective,
                           const ParameterVector& params, const Dataset& data,
                           Index i);

GradVector influence_second(const InverseHvp& inverse,
                            const Objective& objective,
                            const ParameterVector& params, const Dataset& data,
                            Index i, const GradVector& first,
                            SecondOrderMode mode);

// order in {1, 2}.
InfluenceRecord compute_influence(const InverseHvp& inverse,
                                  const Objective& objective,
                                  const ParameterVector& params,
                                  const Dataset& data, Index i, int order,
                                  SecondOrderMode mode);

// theta + sum_k c_k I_k over k <= order, with c_1 = -1/n and
// c_2 = +1/(2n^2) (kVonMises) or -1/(2n^2) (kAlgorithm1). Throws UsageError
// when order is outside {1, 2} or the record lacks a needed term.
ParameterVector loo_params(const ParameterVector& base,
                           const InfluenceRecord& record, Index n, int order,
                           SignConvention signs = SignConvention::kVonMises);

struct LooEnsemble {
  ModelSpec spec;
  ParameterVector base;
  std::vector<ParameterVector> loo_params;
  std::vector<double> residuals;  // |y_i - f(x_i; loo_params[i])|, model units
  int order = 2;
  SecondOrderMode mode = SecondOrderMode::kFull;
  SignConvention signs = SignConvention::kVonMises;
  InverseHvpMode inverse_mode = InverseHvpMode::kDenseDirect;
  double damping = 0.0;
  Index clamped_eigenvalues = 0;
  // n <= 2: intervals are typically vacuous.
  bool degenerate = false;
  // Maps raw inputs/targets to model units when the model was trained on
  // standardized data.
  std::optional<Standardization> scaling;

  Index size() const { return static_cast<Index>(loo_params.size()); }
};

struct EnsembleConfig {
  int order = 2;
  SecondOrderMode mode = SecondOrderMode::kFull;
  SignConvention signs = SignConvention::kVonMises;
  InverseHvpConfig inverse;
  int threads = 1;
};

// Influence-based leave-one-out models for every training point. The
// objective uses n_nominal = data.size(). Per-point work is independent and
// uses the stochastic stream seed ^ i, so results do not depend on `threads`.
// Throws NumericalError naming i on a non-finite residual.
LooEnsemble build_loo_ensemble(const ModelSpec& spec,
                               const ParameterVector& params,
                               const Dataset& data,
                               const EnsembleConfig& config);

}  // namespace djack

#endif  // DJACK_INFLUENCE_H_
