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

// Datasets: synthetic generation, CSV ingestion, splitting, standardization.

#ifndef DJACK_DATA_H_
#define DJACK_DATA_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace djack {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row-major so that each feature row is a contiguous span.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  FeatureMatrix features;  // n x d
  Vector targets;          // n
  std::string name;
  // Feature column names followed by the target column name.
  std::vector<std::string> columns;
  bool standardized = false;

  Index size() const { return targets.size(); }
  Index dim() const { return features.cols(); }
  std::span<const double> row(Index i) const {
    return {features.data() + i * features.cols(),
            static_cast<std::size_t>(features.cols())};
  }

  // Throws UsageError unless n >= 1, row counts agree and all values are
  // finite.
  void validate() const;

  Dataset subset(std::span<const Index> indices) const;
  Dataset without(Index i) const;
  std::vector<std::string> resolved_columns() const;
};

// Affine per-column maps estimated on a training set.
struct Standardization {
  Vector feature_mean;
  Vector feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;
  std::vector<std::string> warnings;

  Dataset apply(const Dataset& data) const;
  std::vector<double> features_to_model(std::span<const double> x) const;
  double target_to_model(double y) const {
    return (y - target_mean) / target_scale;
  }
  double target_to_original(double z) const {
    return target_mean + target_scale * z;
  }
};

enum class FeatureDistribution { kUniform, kNormal };

struct SyntheticConfig {
  Index n = 100;
  FeatureDistribution dist = FeatureDistribution::kUniform;
  double xbar = 1.0;     // uniform support half-width
  double sigma_x = 1.0;  // normal feature standard deviation
  double noise_var = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// y = x^3 + eps with eps ~ N(0, noise_var); x from `dist`. One stream, drawn
// per point as (x, eps).
Dataset gen_synthetic(const SyntheticConfig& config);

// Comma-separated, '.' decimal, mandatory header; last column is the target.
// Blank lines are skipped.
Dataset load_csv(const std::filesystem::path& path);
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Index> train_index;
  std::vector<Index> test_index;
};

// Seeded permutation; |test| = round(test_frac * n) clamped to [1, n - 1].
Split split(const Dataset& data, double test_frac, std::uint64_t seed);

struct StandardizedSplit {
  Dataset train;
  Dataset test;
  Standardization transform;
};

// z-scores features and target with training statistics only (population
// standard deviation). Zero-variance columns keep scale 1 and add a warning.
StandardizedSplit standardize(const Dataset& train, const Dataset& test);

std::string to_string(FeatureDistribution dist);
FeatureDistribution parse_feature_distribution(const std::string& text);

}  // namespace djack

#endif  // DJACK_DATA_H_
