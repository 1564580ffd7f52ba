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

#include "djack/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "djack/error.h"

namespace djack {
namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const double a = values[n / 2 - 1];
  const double b = values[n / 2];
  return a == b ? a : 0.5 * (a + b);
}

}  // namespace

double coverage(std::span<const PredictionInterval> intervals,
                std::span<const double> targets) {
  if (intervals.empty()) throw UsageError("coverage of an empty set");
  if (intervals.size() != targets.size()) {
    throw UsageError("interval and target counts differ");
  }
  std::size_t covered = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (intervals[i].covers(targets[i])) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(targets.size());
}

double error_threshold(std::span<const double> errors) {
  if (errors.empty()) throw UsageError("error threshold of an empty set");
  const auto n = static_cast<Index>(errors.size());
  const Index k = std::min(quantile_rank(n, 0.1), n);
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[static_cast<std::size_t>(k - 1)];
}

double auprc(std::span<const double> scores, std::span<const double> errors,
             double threshold) {
  if (scores.size() != errors.size()) {
    throw UsageError("score and error counts differ");
  }
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (const double e : errors) positives += e > threshold ? 1 : 0;
  if (positives == 0) {
    throw UsageError(
        "no test error exceeds the threshold; AUPRC is undefined for this "
        "split");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double ap = 0.0;
  std::size_t seen = 0;
  std::size_t hits = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    std::size_t group_hits = 0;
    while (end < n && scores[order[end]] == scores[order[start]]) {
      group_hits += errors[order[end]] > threshold ? 1 : 0;
      ++end;
    }
    seen += end - start;
    hits += group_hits;
    if (group_hits > 0) {
      const double precision = static_cast<double>(hits) / static_cast<double>(seen);
      ap += precision * static_cast<double>(group_hits) /
            static_cast<double>(positives);
    }
    start = end;
  }
  return ap;
}

std::string to_string(IntervalMethod method) {
  return method == IntervalMethod::kDiscriminative ? "dj" : "naive";
}

Evaluation evaluate(const LooEnsemble& ensemble, const Dataset& test,
                    double alpha, IntervalMethod method) {
  test.validate();
  if (test.dim() != ensemble.spec.input_dim) {
    throw UsageError("test features do not match the model input dimension");
  }
  Evaluation out;
  const Index m = test.size();
  out.intervals.reserve(static_cast<std::size_t>(m));
  out.errors.reserve(static_cast<std::size_t>(m));
  std::vector<double> widths;
  std::vector<double> targets(test.targets.data(), test.targets.data() + m);
  for (Index i = 0; i < m; ++i) {
    std::vector<double> x(test.row(i).begin(), test.row(i).end());
    if (ensemble.scaling) x = ensemble.scaling->features_to_model(x);
    PredictionInterval interval =
        method == IntervalMethod::kDiscriminative
            ? dj_interval(ensemble, x, alpha)
            : naive_jackknife_interval(ensemble, x, alpha);
    if (ensemble.scaling) interval = to_original_units(interval, *ensemble.scaling);
    const double err = (test.targets(i) - interval.center) *
                       (test.targets(i) - interval.center);
    out.errors.push_back(err);
    widths.push_back(interval.width);
    out.intervals.push_back(interval);
  }

  EvalReport& r = out.report;
  r.method = to_string(method);
  r.coverage = coverage(out.intervals, targets);
  r.mean_width = std::accumulate(widths.begin(), widths.end(), 0.0) /
                 static_cast<double>(m);
  r.median_width = median(widths);
  r.vacuous_count = std::count_if(out.intervals.begin(), out.intervals.end(),
                                  [](const auto& iv) { return iv.vacuous(); });
  r.mse = std::accumulate(out.errors.begin(), out.errors.end(), 0.0) /
          static_cast<double>(m);
  r.threshold = error_threshold(out.errors);
  const auto positives = std::count_if(out.errors.begin(), out.errors.end(),
                                       [&](double e) { return e > r.threshold; });
  r.prevalence = static_cast<double>(positives) / static_cast<double>(m);
  if (positives > 0) r.auprc = auprc(widths, out.errors, r.threshold);
  r.alpha = alpha;
  r.order = ensemble.order;
  r.mode = to_string(ensemble.mode);
  r.inverse_mode = to_string(ensemble.inverse_mode);
  r.damping = ensemble.damping;
  r.n_train = ensemble.size();
  r.n_test = m;
  r.degenerate = ensemble.degenerate;
  return out;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["coverage"] = r.coverage;
  j["mean_width"] = json_number(r.mean_width);
  j["median_width"] = json_number(r.median_width);
  j["vacuous_count"] = r.vacuous_count;
  j["auprc"] = r.auprc ? nlohmann::ordered_json(*r.auprc) : nullptr;
  j["prevalence"] = r.prevalence;
  j["threshold"] = r.threshold;
  j["mse"] = r.mse;
  j["alpha"] = r.alpha;
  j["m"] = r.order;
  j["mode"] = r.mode;
  j["inverse_mode"] = r.inverse_mode;
  j["damping"] = r.damping;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["degenerate"] = r.degenerate;
  return j;
}

std::string csv_header(const EvalReport&) {
  return "method,coverage,mean_width,median_width,vacuous_count,auprc,"
         "prevalence,threshold,mse,alpha,m,mode,inverse_mode,damping,n_train,"
         "n_test";
}

std::string csv_row(const EvalReport& r) {
  std::string row = r.method + "," + number(r.coverage) + "," +
                    number(r.mean_width) + "," + number(r.median_width) + "," +
                    std::to_string(r.vacuous_count) + "," +
                    (r.auprc ? number(*r.auprc) : std::string()) + "," +
                    number(r.prevalence) + "," + number(r.threshold) + "," +
                    number(r.mse) + "," + number(r.alpha) + "," +
                    std::to_string(r.order) + "," + r.mode + "," +
                    r.inverse_mode + "," + number(r.damping) + "," +
                    std::to_string(r.n_train) + "," + std::to_string(r.n_test);
  return row;
}

}  // namespace djack
