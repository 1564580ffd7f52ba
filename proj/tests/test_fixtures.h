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

// Small fixtures and independent reference computations shared by the tests.

#ifndef DJACK_TESTS_TEST_FIXTURES_H_
#define DJACK_TESTS_TEST_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "djack/data.h"
#include "djack/model.h"
#include "djack/rng.h"

namespace djack::testing {

inline Dataset random_dataset(Index n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.features.resize(n, d);
  data.targets.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.features(i, j) = rng.uniform(-2.0, 2.0);
    data.targets(i) = rng.normal();
  }
  return data;
}

inline ParameterVector random_params(const ModelSpec& spec, std::uint64_t seed,
                                     double scale = 1.0) {
  Rng rng(seed);
  ParameterVector p(Network(spec).param_count());
  for (Index k = 0; k < p.size(); ++k) p(k) = scale * rng.normal();
  return p;
}

inline Vector random_vector(Index p, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(p);
  for (Index k = 0; k < p; ++k) v(k) = rng.normal();
  return v;
}

// Central differences of loss_point, one coordinate at a time.
inline Vector fd_gradient(const Objective& obj, const ParameterVector& params,
                          std::span<const double> x, double y, double h) {
  Vector g(params.size());
  ParameterVector q = params;
  for (Index k = 0; k < params.size(); ++k) {
    q(k) = params(k) + h;
    const double up = loss_point(obj, q, x, y);
    q(k) = params(k) - h;
    const double down = loss_point(obj, q, x, y);
    q(k) = params(k);
    g(k) = (up - down) / (2.0 * h);
  }
  return g * obj.loss_scale();
}

// Plain Gaussian elimination with partial pivoting.
inline Vector gauss_solve(Matrix a, Vector b) {
  const Index n = a.rows();
  for (Index c = 0; c < n; ++c) {
    Index pivot = c;
    for (Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    }
    a.row(c).swap(a.row(pivot));
    std::swap(b(c), b(pivot));
    for (Index r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (Index k = c; k < n; ++k) a(r, k) -= f * a(c, k);
      b(r) -= f * b(c);
    }
  }
  Vector x(n);
  for (Index r = n - 1; r >= 0; --r) {
    double s = b(r);
    for (Index k = r + 1; k < n; ++k) s -= a(r, k) * x(k);
    x(r) = s / a(r, r);
  }
  return x;
}

// k-th smallest (1-based) by full sort; +inf past the end.
inline double sorted_rank(std::vector<double> v, long k) {
  std::sort(v.begin(), v.end());
  if (k > static_cast<long>(v.size())) return INFINITY;
  return v[static_cast<std::size_t>(std::max(k, 1L) - 1)];
}

inline long rank_for(std::size_t n, double alpha) {
  // Smallest k with k >= (1 - alpha)(n + 1), by counting.
  long k = 0;
  while (static_cast<double>(k) < (1.0 - alpha) * static_cast<double>(n + 1) - 1e-9) ++k;
  return k;
}

}  // namespace djack::testing

#endif  // DJACK_TESTS_TEST_FIXTURES_H_
