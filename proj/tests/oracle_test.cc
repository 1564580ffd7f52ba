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
#include "djack/oracle.h"
#include "djack/validation.h"
#include "test_fixtures.h"

namespace djack {
namespace {

using testing::random_dataset;
using testing::random_params;

Matrix design(const Dataset& data) {
  Matrix x(data.size(), data.dim() + 1);
  x.leftCols(data.dim()) = data.features;
  x.col(data.dim()).setOnes();
  return x;
}

TEST(RidgeOracleTest, ClosedFormMatchesRefit) {
  const Dataset data = random_dataset(40, 3, 1);
  const RidgeLoo closed = ridge_loo_closed_form(data, 0.7);
  for (Index i = 0; i < data.size(); ++i) {
    const ParameterVector theta = ridge_refit_without(data, 0.7, i);
    const double pred = design(data).row(i).dot(theta);
    EXPECT_NEAR(closed.loo_residuals(i), std::abs(data.targets(i) - pred), 1e-8);
  }
}

TEST(RidgeOracleTest, HugePenaltyLeavesOnlyTheIntercept) {
  const Dataset data = random_dataset(20, 2, 2);
  const RidgeLoo closed = ridge_loo_closed_form(data, 1e12);
  const double mean = data.targets.mean();
  for (Index i = 0; i < 20; ++i) {
    // Intercept-only LOO: |y_i - mean| / (1 - 1/n).
    EXPECT_NEAR(closed.loo_residuals(i), std::abs(data.targets(i) - mean) * 20.0 / 19.0,
                1e-6);
  }
}

TEST(RidgeOracleTest, BalancedDesignHasUniformLeverage) {
  Dataset data;
  data.features.resize(4, 2);
  data.features << 1, 1, 1, -1, -1, 1, -1, -1;
  data.targets = Vector::LinSpaced(4, 0.0, 3.0);
  const RidgeLoo closed = ridge_loo_closed_form(data, 0.0);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(closed.leverage(i), 3.0 / 4.0, 1e-12);
  EXPECT_THROW(ridge_loo_closed_form(data.subset(std::vector<Index>{0, 1}), 0.0),
               UsageError);
  EXPECT_THROW(ridge_loo_closed_form(data, -1.0), UsageError);
}

TEST(RidgeOracleTest, FitIsStationaryForTheObjective) {
  const Dataset data = random_dataset(30, 2, 3);
  const ModelSpec spec = ridge_spec(2, 1.5);
  const ParameterVector theta = ridge_fit(data, 1.5);
  EXPECT_LE(grad_total(Objective(spec, 30), theta, data).norm(), 1e-12);
}

TEST(DenseHessianTest, RidgeAnalyticForm) {
  const Index n = 25;
  const double lambda = 0.8;
  const Dataset data = random_dataset(n, 3, 4);
  const ModelSpec spec = ridge_spec(3, lambda);
  const Objective obj(spec, n);
  const Matrix h = dense_hessian(obj, random_params(spec, 5), data);
  const Matrix x = design(data);
  Matrix expected = x.transpose() * x;
  for (Index j = 0; j < 3; ++j) expected(j, j) += lambda;
  expected *= 2.0 / static_cast<double>(n);
  EXPECT_LE((h - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DenseHessianTest, ColumnsAreHvps) {
  ModelSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = {3};
  const Dataset data = random_dataset(10, 2, 6);
  const ParameterVector params = random_params(spec, 7);
  const Objective obj(spec, 10);
  const Matrix h = dense_hessian(obj, params, data);
  EXPECT_EQ(h, h.transpose());
  for (Index j = 0; j < h.cols(); ++j) {
    const Vector col =
        hvp(obj, params, data, HvpScope::full_data(), Vector::Unit(h.cols(), j));
    EXPECT_LE((h.col(j) - col).norm(), 1e-10 * std::max(1.0, col.norm()));
  }
  const double damping = 1e-2;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Vector lambda = eig.eigenvalues().cwiseMax(0.0).array() + damping;
  EXPECT_GE(lambda.minCoeff(), damping - 1e-8);
  EXPECT_THROW(dense_hessian(obj, params, data, 5), UsageError);
}

TEST(RetrainTest, DeterministicAndRejectsTinyData) {
  ModelSpec spec;
  spec.hidden_layers = {4};
  const Dataset data = random_dataset(16, 1, 8);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 4;
  EXPECT_EQ(exact_loo_retrain(spec, data, 3, cfg), exact_loo_retrain(spec, data, 3, cfg));
  EXPECT_NE(exact_loo_retrain(spec, data, 3, cfg), train(spec, data, cfg).params);
  EXPECT_THROW(exact_loo_retrain(spec, data.subset(std::vector<Index>{0}), 0, cfg),
               UsageError);
}

TEST(RetrainTest, DroppingEitherTwinGivesTheSameFit) {
  RidgeCheckConfig rc;
  Dataset data = ridge_data(rc);
  data.features.row(199) = data.features.row(0);
  data.targets(199) = data.targets(0);
  const ParameterVector full = ridge_fit(data, 1.0);
  const ParameterVector dropped = ridge_refit_without(data, 1.0, 199);
  // Removing one copy is an O(1/n) perturbation (about 1e-2 of the fit at
  // n = 200), not a no-op.
  const double n = static_cast<double>(data.size());
  EXPECT_LE((full - dropped).norm(), 10.0 * full.norm() / n);
  EXPECT_LE((ridge_refit_without(data, 1.0, 0) - dropped).norm(), 1e-12);
}

}  // namespace
}  // namespace djack
