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

#include "djack/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "djack/error.h"
#include "djack/rng.h"

namespace djack {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() &&
         std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Dataset::validate() const {
  if (targets.size() < 1) throw UsageError("dataset is empty");
  if (features.rows() != targets.size()) {
    throw UsageError("feature rows (" + std::to_string(features.rows()) +
                     ") and targets (" + std::to_string(targets.size()) +
                     ") disagree");
  }
  if (features.cols() < 1) throw UsageError("dataset has no feature columns");
  if (!features.allFinite() || !targets.allFinite()) {
    throw UsageError("dataset contains non-finite values");
  }
}

Dataset Dataset::subset(std::span<const Index> indices) const {
  Dataset out;
  out.name = name;
  out.columns = columns;
  out.standardized = standardized;
  out.features.resize(static_cast<Index>(indices.size()), features.cols());
  out.targets.resize(static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= size()) throw UsageError("subset index out of range");
    out.features.row(static_cast<Index>(k)) = features.row(i);
    out.targets(static_cast<Index>(k)) = targets(i);
  }
  return out;
}

Dataset Dataset::without(Index i) const {
  if (i < 0 || i >= size()) throw UsageError("index out of range");
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(size() - 1));
  for (Index j = 0; j < size(); ++j) {
    if (j != i) keep.push_back(j);
  }
  return subset(keep);
}

std::vector<std::string> Dataset::resolved_columns() const {
  if (static_cast<Index>(columns.size()) == dim() + 1) return columns;
  std::vector<std::string> names;
  for (Index j = 0; j < dim(); ++j) names.push_back("x" + std::to_string(j + 1));
  names.push_back("y");
  return names;
}

Dataset Standardization::apply(const Dataset& data) const {
  if (data.dim() != feature_mean.size()) {
    throw UsageError("standardization dimension mismatch");
  }
  Dataset out = data;
  for (Index j = 0; j < data.dim(); ++j) {
    out.features.col(j) =
        (data.features.col(j).array() - feature_mean(j)) / feature_scale(j);
  }
  out.targets = (data.targets.array() - target_mean) / target_scale;
  out.standardized = true;
  return out;
}

std::vector<double> Standardization::features_to_model(
    std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != feature_mean.size()) {
    throw UsageError("standardization dimension mismatch");
  }
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto jj = static_cast<Index>(j);
    z[j] = (x[j] - feature_mean(jj)) / feature_scale(jj);
  }
  return z;
}

void SyntheticConfig::validate() const {
  if (n < 1) throw UsageError("synthetic n must be positive");
  if (dist == FeatureDistribution::kUniform && !(xbar > 0.0)) {
    throw UsageError("xbar must be positive");
  }
  if (dist == FeatureDistribution::kNormal && !(sigma_x > 0.0)) {
    throw UsageError("sigma_x must be positive");
  }
  if (!(noise_var >= 0.0)) throw UsageError("noise variance must be >= 0");
}

Dataset gen_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const double noise_sd = std::sqrt(config.noise_var);
  Dataset data;
  data.name = "synthetic-" + to_string(config.dist);
  data.columns = {"x", "y"};
  data.features.resize(config.n, 1);
  data.targets.resize(config.n);
  for (Index i = 0; i < config.n; ++i) {
    const double x = config.dist == FeatureDistribution::kUniform
                         ? rng.uniform(-config.xbar, config.xbar)
                         : rng.normal(0.0, config.sigma_x);
    const double eps = rng.normal();
    data.features(i, 0) = x;
    data.targets(i) = x * x * x + (noise_sd > 0.0 ? noise_sd * eps : 0.0);
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file: " + path.string());

  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (const auto field : split_fields(line)) header.emplace_back(field);
    break;
  }
  if (header.empty()) throw IoError(path.string() + ": missing header row");
  if (header.size() < 2) {
    throw IoError(path.string() +
                  ": need at least one feature column and a target column");
  }

  const std::size_t width = header.size();
  std::vector<double> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected " + std::to_string(width) + " fields, found " +
                    std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": column '" + header[c] + "' has non-numeric value '" +
                      std::string(fields[c]) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IoError(path.string() + ": no data rows");

  const auto d = static_cast<Index>(width - 1);
  Dataset data;
  data.name = path.stem().string();
  data.columns = header;
  data.features.resize(rows, d);
  data.targets.resize(rows);
  for (Index i = 0; i < rows; ++i) {
    const auto base = static_cast<std::size_t>(i) * width;
    for (Index j = 0; j < d; ++j) {
      data.features(i, j) = values[base + static_cast<std::size_t>(j)];
    }
    data.targets(i) = values[base + width - 1];
  }
  return data;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto names = data.resolved_columns();
  for (std::size_t c = 0; c < names.size(); ++c) {
    out << (c ? "," : "") << names[c];
  }
  out << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) {
      out << format_double(data.features(i, j)) << ',';
    }
    out << format_double(data.targets(i)) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Split split(const Dataset& data, double test_frac, std::uint64_t seed) {
  if (data.size() < 2) throw UsageError("split needs at least 2 rows");
  if (!(test_frac > 0.0 && test_frac < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1)");
  }
  const Index n = data.size();
  const auto n_test = std::clamp<Index>(
      static_cast<Index>(std::llround(test_frac * static_cast<double>(n))), 1,
      n - 1);
  Rng rng(seed);
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  Split out;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const auto i = static_cast<Index>(perm[k]);
    (static_cast<Index>(k) < n_test ? out.test_index : out.train_index)
        .push_back(i);
  }
  std::sort(out.train_index.begin(), out.train_index.end());
  std::sort(out.test_index.begin(), out.test_index.end());
  out.train = data.subset(out.train_index);
  out.test = data.subset(out.test_index);
  return out;
}

StandardizedSplit standardize(const Dataset& train, const Dataset& test) {
  train.validate();
  if (test.size() > 0 && test.dim() != train.dim()) {
    throw UsageError("train/test feature dimensions differ");
  }
  const auto names = train.resolved_columns();
  Standardization t;
  const Index d = train.dim();
  t.feature_mean.resize(d);
  t.feature_scale.resize(d);
  const auto moments = [](const auto& col, double& mean, double& scale) {
    mean = col.mean();
    scale = std::sqrt((col.array() - mean).square().mean());
  };
  for (Index j = 0; j < d; ++j) {
    double mean = 0.0, scale = 0.0;
    moments(train.features.col(j), mean, scale);
    if (!(scale > 0.0)) {
      t.warnings.push_back("feature column '" +
                           names[static_cast<std::size_t>(j)] +
                           "' has zero variance; left unscaled");
      scale = 1.0;
    }
    t.feature_mean(j) = mean;
    t.feature_scale(j) = scale;
  }
  moments(train.targets, t.target_mean, t.target_scale);
  if (!(t.target_scale > 0.0)) {
    t.warnings.push_back("target has zero variance; left unscaled");
    t.target_scale = 1.0;
  }
  StandardizedSplit out;
  out.train = t.apply(train);
  out.test = test.size() > 0 ? t.apply(test) : test;
  out.transform = std::move(t);
  return out;
}

std::string to_string(FeatureDistribution dist) {
  return dist == FeatureDistribution::kUniform ? "uniform" : "normal";
}

FeatureDistribution parse_feature_distribution(const std::string& text) {
  if (text == "uniform") return FeatureDistribution::kUniform;
  if (text == "normal") return FeatureDistribution::kNormal;
  throw UsageError("unknown feature distribution '" + text + "'");
}

}  // namespace djack
