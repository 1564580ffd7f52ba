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
#include "test_fixtures.h"

namespace djack {
namespace {

using testing::random_dataset;
using testing::random_params;
using testing::random_vector;

struct Fixture {
  ModelSpec spec;
  Dataset data;
  ParameterVector params;
};

Fixture small_net(std::uint64_t seed, Activation act = Activation::kTanh) {
  Fixture f;
  f.spec.input_dim = 2;
  f.spec.hidden_layers = {4, 3};
  f.spec.activation = act;
  f.spec.l2_penalty = 0.3;
  f.data = random_dataset(12, 2, seed);
  f.params = random_params(f.spec, seed + 100, 0.7);
  return f;
}

double rel(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

TEST(GradTest, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Fixture f = small_net(seed);
    const Objective obj(f.spec, f.data.size());
    const Vector g = grad_point(obj, f.params, f.data.row(3), f.data.targets(3));
    const Vector fd = testing::fd_gradient(obj, f.params, f.data.row(3),
                                           f.data.targets(3), 1e-5);
    for (Index k = 0; k < g.size(); ++k) {
      EXPECT_NEAR(g(k), fd(k), 1e-6 * std::max(1.0, std::abs(fd(k))));
    }
  }
}

TEST(GradTest, ZeroResidualWithoutPenaltyIsZero) {
  Fixture f = small_net(1);
  f.spec.l2_penalty = 0.0;
  const Objective obj(f.spec, 12);
  const Network& net = obj.net();
  const double y = net.predict(f.params, f.data.row(0));
  EXPECT_EQ(grad_point(obj, f.params, f.data.row(0), y).norm(), 0.0);
}

TEST(GradTest, LossScalingScalesGradient) {
  const Fixture f = small_net(2);
  const Objective obj(f.spec, 12);
  const Vector g = grad_total(obj, f.params, f.data);
  const Vector g3 = grad_total(obj.scaled(3.0), f.params, f.data);
  EXPECT_LE(rel(g3, 3.0 * g), 1e-14);
}

TEST(GradTest, TotalIsMeanOfPoints) {
  const Fixture f = small_net(3);
  const Objective obj(f.spec, 12);
  const Dataset one = f.data.subset(std::vector<Index>{5});
  EXPECT_LE(rel(grad_total(obj, f.params, one),
                grad_point(obj, f.params, f.data.row(5), f.data.targets(5))),
            1e-15);
  Dataset twins = f.data.subset(std::vector<Index>{5, 5});
  EXPECT_LE(rel(grad_total(obj, f.params, twins),
                grad_point(obj, f.params, f.data.row(5), f.data.targets(5))),
            1e-15);
  EXPECT_THROW(grad_total(obj, f.params, Dataset{}), UsageError);
}

TEST(GradTest, TrainedOptimumHasSmallGradient) {
  ModelSpec spec;
  spec.hidden_layers = {5};
  spec.l2_penalty = 1.0;
  const Dataset data = random_dataset(30, 1, 4);
  TrainConfig cfg;
  cfg.polish_steps = 30;
  const TrainResult fit = train(spec, data, cfg);
  const Objective obj(spec, data.size());
  EXPECT_LE(grad_total(obj, fit.params, data).norm(), fit.final_grad_norm + 1e-15);
}

TEST(HvpTest, MatchesDifferenceOfGradients) {
  for (const Activation act : {Activation::kTanh, Activation::kRelu}) {
    const Fixture f = small_net(4, act);
    const Objective obj(f.spec, 12);
    const Vector v = random_vector(f.params.size(), 9);
    const double h = 1e-4;
    const Vector fd = (grad_total(obj, f.params + h * v, f.data) -
                       grad_total(obj, f.params - h * v, f.data)) /
                      (2 * h);
    EXPECT_LE(rel(hvp(obj, f.params, f.data, HvpScope::full_data(), v), fd), 1e-4);
  }
}

TEST(HvpTest, LinearSymmetricAndMeanOfPoints) {
  const Fixture f = small_net(5);
  const Objective obj(f.spec, 12);
  const auto all = HvpScope::full_data();
  const Index p = f.params.size();
  const Vector v1 = random_vector(p, 1), v2 = random_vector(p, 2);
  EXPECT_EQ(hvp(obj, f.params, f.data, all, Vector::Zero(p)).norm(), 0.0);
  const Vector sum = hvp(obj, f.params, f.data, all, v1 + v2);
  const Vector parts = hvp(obj, f.params, f.data, all, v1) +
                       hvp(obj, f.params, f.data, all, v2);
  EXPECT_LE(rel(sum, parts), 1e-10);
  const double a = v2.dot(hvp(obj, f.params, f.data, all, v1));
  const double b = v1.dot(hvp(obj, f.params, f.data, all, v2));
  EXPECT_LE(std::abs(a - b), 1e-9 * std::max(std::abs(a), 1.0));

  Vector mean = Vector::Zero(p);
  for (Index i = 0; i < f.data.size(); ++i) {
    mean += hvp_point(obj, f.params, f.data.row(i), f.data.targets(i), v1) /
            static_cast<double>(f.data.size());
  }
  EXPECT_LE(rel(hvp(obj, f.params, f.data, all, v1), mean), 1e-12);
  EXPECT_LE(rel(hvp(obj, f.params, f.data, HvpScope::single_point(2), v1),
                hvp_point(obj, f.params, f.data.row(2), f.data.targets(2), v1)),
            1e-15);
  EXPECT_THROW(hvp(obj, f.params, f.data, HvpScope::subsample({}), v1), UsageError);
  EXPECT_THROW(hvp(obj, f.params, f.data, HvpScope::subsample({12}), v1),
               UsageError);
}

TEST(ThirdTest, VanishesOnQuadraticLoss) {
  const Dataset data = random_dataset(20, 3, 6);
  const ModelSpec spec = ridge_spec(3, 0.5);
  const Objective obj(spec, 20);
  const ParameterVector params = random_params(spec, 7);
  const Vector u = random_vector(4, 8), w = random_vector(4, 9);
  const Vector t = third_directional(obj, params, data, u, w);
  const Vector hu = hvp(obj, params, data, HvpScope::full_data(), u);
  EXPECT_LE(t.norm(), 1e-6 * hu.norm());
  EXPECT_EQ(third_directional(obj, params, data, Vector::Zero(4), w).norm(), 0.0);
}

TEST(ThirdTest, SymmetricAndHomogeneous) {
  const Fixture f = small_net(7);
  const Objective obj(f.spec, 12);
  const Index p = f.params.size();
  const Vector u = random_vector(p, 3), w = random_vector(p, 4);
  const Vector tuw = third_directional(obj, f.params, f.data, u, w);
  const Vector twu = third_directional(obj, f.params, f.data, w, u);
  EXPECT_LE((tuw - twu).norm(), 1e-3 * (tuw.norm() + 1e-12));
  const Vector scaled = third_directional(obj, f.params, f.data, 2.5 * u, w);
  EXPECT_LE(rel(scaled, 2.5 * tuw), 1e-3);
}

}  // namespace
}  // namespace djack
