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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "djack/diff.h"
#include "djack/error.h"
#include "djack/influence.h"
#include "djack/oracle.h"
#include "test_fixtures.h"

namespace djack {
namespace {

using testing::gauss_solve;
using testing::random_dataset;
using testing::random_vector;

struct Ridge {
  ModelSpec spec;
  Dataset data;
  ParameterVector params;
};

Ridge ridge_problem(Index n, int d, std::uint64_t seed, double lambda = 0.5) {
  Ridge r;
  r.spec = ridge_spec(d, lambda);
  r.data = random_dataset(n, d, seed);
  r.params = ridge_fit(r.data, lambda);
  return r;
}

double rel(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

InverseHvpConfig dense(double damping) {
  InverseHvpConfig cfg;
  cfg.damping = damping;
  return cfg;
}

TEST(InverseHvpTest, DenseMatchesGaussianElimination) {
  const Ridge r = ridge_problem(25, 3, 1);
  const Objective obj(r.spec, 25);
  const Matrix h = dense_hessian(obj, r.params, r.data);
  const Vector w = random_vector(4, 2);
  for (const double damping : {0.0, 0.01}) {
    const Vector got = inverse_hvp(obj, r.params, r.data, w, dense(damping));
    const Matrix damped = h + damping * Matrix::Identity(4, 4);
    EXPECT_LE(rel(got, gauss_solve(damped, w)), 1e-10);
  }
}

TEST(InverseHvpTest, ClampsNegativeEigenvalues) {
  Matrix h(2, 2);
  h << 2.0, 0.0, 0.0, -1.0;
  const InverseHvp inv = InverseHvp::from_matrix(h, 0.5);
  EXPECT_EQ(inv.clamped_eigenvalues(), 1);
  const Vector got = inv.apply(Vector::Unit(2, 1));
  EXPECT_NEAR(got(1), 2.0, 1e-15);
  EXPECT_NEAR(got(0), 0.0, 1e-15);
  EXPECT_NEAR(inv.apply(Vector::Unit(2, 0))(0), 1.0 / 2.5, 1e-15);
  EXPECT_THROW(InverseHvp::from_matrix(h, 0.0), NumericalError);
  EXPECT_THROW(inv.apply(Vector::Zero(3)), UsageError);
}

TEST(InverseHvpTest, NeumannApproachesDense) {
  const Ridge r = ridge_problem(40, 3, 3, 2.0);
  const Objective obj(r.spec, 40);
  const Vector w = random_vector(4, 4);
  InverseHvpConfig cfg = dense(0.1);
  const Vector exact = inverse_hvp(obj, r.params, r.data, w, cfg);
  cfg.mode = InverseHvpMode::kStochasticNeumann;
  cfg.recursion_depth = 400;
  cfg.subsample_size = 40;
  cfg.repeats = 1;
  const InverseHvp inv(obj, r.params, r.data, cfg);
  EXPECT_GT(inv.largest_eigenvalue(), inv.smallest_eigenvalue());
  EXPECT_GT(inv.smallest_eigenvalue(), 0.0);
  EXPECT_LE(rel(inv.apply(w), exact), 1e-3);
}

TEST(InverseHvpTest, ConfigValidation) {
  InverseHvpConfig cfg;
  cfg.damping = -1.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = InverseHvpConfig{};
  cfg.recursion_depth = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  EXPECT_EQ(parse_inverse_hvp_mode("stochastic"), InverseHvpMode::kStochasticNeumann);
  EXPECT_EQ(parse_second_order_mode(to_string(SecondOrderMode::kMainText)),
            SecondOrderMode::kMainText);
  EXPECT_EQ(parse_sign_convention("alg1"), SignConvention::kAlgorithm1);
  EXPECT_THROW(parse_sign_convention("plus"), UsageError);
}

TEST(InfluenceTest, FirstOrderIsNewtonDirection) {
  const Ridge r = ridge_problem(20, 2, 5);
  const Objective obj(r.spec, 20);
  const InverseHvp inv(obj, r.params, r.data, dense(0.0));
  const Matrix h = dense_hessian(obj, r.params, r.data);
  const Vector g = grad_point(obj, r.params, r.data.row(7), r.data.targets(7));
  EXPECT_LE(rel(influence_first(inv, obj, r.params, r.data, 7), -gauss_solve(h, g)),
            1e-10);
  EXPECT_THROW(influence_first(inv, obj, r.params, r.data, 20), UsageError);
}

TEST(InfluenceTest, InvariantToLossScaling) {
  const Ridge r = ridge_problem(20, 2, 6);
  const Objective obj(r.spec, 20);
  const Objective summed = obj.scaled(20.0);
  const InverseHvp inv(obj, r.params, r.data, dense(0.0));
  const InverseHvp inv_sum(summed, r.params, r.data, dense(0.0));
  for (Index i : {0, 9}) {
    const auto a = compute_influence(inv, obj, r.params, r.data, i, 2,
                                     SecondOrderMode::kFull);
    const auto b = compute_influence(inv_sum, summed, r.params, r.data, i, 2,
                                     SecondOrderMode::kFull);
    EXPECT_LE(rel(b.first_order, a.first_order), 1e-10);
    EXPECT_LE(rel(*b.second_order, *a.second_order), 1e-6);
  }
}

TEST(InfluenceTest, SecondOrderTightensQuadraticLoo) {
  const Index n = 30;
  const Ridge r = ridge_problem(n, 3, 7);
  const Objective obj(r.spec, n);
  const InverseHvp inv(obj, r.params, r.data, dense(0.0));
  const Matrix h = dense_hessian(obj, r.params, r.data);
  for (Index i = 0; i < n; ++i) {
    // Minimiser of L - l_i / n; exact in one Newton step for a quadratic.
    const Dataset one = r.data.subset(std::vector<Index>{i});
    const Matrix hi = dense_hessian(obj, r.params, one);
    const Vector g = grad_point(obj, r.params, r.data.row(i), r.data.targets(i));
    const Vector exact =
        r.params + gauss_solve(h - hi / static_cast<double>(n), g) / static_cast<double>(n);

    const auto rec = compute_influence(inv, obj, r.params, r.data, i, 2,
                                       SecondOrderMode::kFull);
    const double e1 = (loo_params(r.params, rec, n, 1) - exact).norm();
    const double e2 = (loo_params(r.params, rec, n, 2) - exact).norm();
    const double e_alg1 =
        (loo_params(r.params, rec, n, 2, SignConvention::kAlgorithm1) - exact).norm();
    EXPECT_LT(e2, e1) << "point " << i;
    EXPECT_LT(e2, e_alg1) << "point " << i;
  }
}

TEST(InfluenceTest, MainTextDropsOnlyTheThirdDerivative) {
  const Ridge r = ridge_problem(15, 2, 8);
  const Objective obj(r.spec, 15);
  const InverseHvp inv(obj, r.params, r.data, dense(0.0));
  const auto full = compute_influence(inv, obj, r.params, r.data, 3, 2,
                                      SecondOrderMode::kFull);
  const auto main = compute_influence(inv, obj, r.params, r.data, 3, 2,
                                      SecondOrderMode::kMainText);
  // The third derivative of a quadratic loss is zero.
  EXPECT_LE(rel(*full.second_order, *main.second_order), 1e-5);
}

TEST(LooParamsTest, UpdateFormulas) {
  InfluenceRecord rec;
  rec.first_order = Vector::Constant(2, 4.0);
  rec.second_order = Vector::Constant(2, 8.0);
  const Vector base = Vector::Zero(2);
  EXPECT_DOUBLE_EQ(loo_params(base, rec, 2, 1)(0), -2.0);
  EXPECT_DOUBLE_EQ(loo_params(base, rec, 2, 2)(0), -1.0);
  EXPECT_DOUBLE_EQ(loo_params(base, rec, 2, 2, SignConvention::kAlgorithm1)(0), -3.0);
  rec.second_order.reset();
  EXPECT_THROW(loo_params(base, rec, 2, 2), UsageError);
  EXPECT_THROW(loo_params(base, rec, 0, 1), UsageError);
  EXPECT_THROW(loo_params(base, rec, 2, 3), UsageError);
}

TEST(EnsembleTest, ResidualsAndThreadDeterminism) {
  ModelSpec spec;
  spec.hidden_layers = {6};
  spec.l2_penalty = 0.1;
  const Dataset data = random_dataset(24, 1, 9);
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 8;
  tc.learning_rate = 1e-2;
  const TrainResult fit = train(spec, data, tc);
  EnsembleConfig cfg;
  const LooEnsemble one = build_loo_ensemble(spec, fit.params, data, cfg);
  cfg.threads = 4;
  const LooEnsemble four = build_loo_ensemble(spec, fit.params, data, cfg);
  ASSERT_EQ(one.size(), 24);
  EXPECT_FALSE(one.degenerate);
  const Network net(spec);
  for (Index i = 0; i < 24; ++i) {
    const auto k = static_cast<std::size_t>(i);
    EXPECT_EQ(one.loo_params[k], four.loo_params[k]);
    EXPECT_EQ(one.residuals[k],
              std::abs(data.targets(i) - net.predict(one.loo_params[k], data.row(i))));
  }
  const Dataset tiny = data.subset(std::vector<Index>{0, 1});
  EXPECT_TRUE(build_loo_ensemble(spec, fit.params, tiny, cfg).degenerate);
}

TEST(EnsembleTest, RidgeResidualsMatchHatMatrix) {
  const Index n = 200;
  const Dataset data = random_dataset(n, 2, 10);
  const RidgeLoo closed = ridge_loo_closed_form(data, 1.0);
  EnsembleConfig cfg;
  cfg.order = 1;
  cfg.inverse.damping = 0.0;
  const LooEnsemble ens = build_loo_ensemble(ridge_spec(2, 1.0), closed.params, data, cfg);
  for (Index i = 0; i < n; ++i) {
    EXPECT_NEAR(ens.residuals[static_cast<std::size_t>(i)], closed.loo_residuals(i),
                2e-2);
  }
}

}  // namespace
}  // namespace djack
