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

// Coverage and discrimination metrics for a set of predictive intervals.

#ifndef DJACK_EVAL_H_
#define DJACK_EVAL_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "djack/jackknife.h"

namespace djack {

// Fraction of targets inside their closed interval; infinite endpoints cover.
double coverage(std::span<const PredictionInterval> intervals,
                std::span<const double> targets);

// ceil(0.9 (n + 1))-th smallest error, rank clamped to n.
double error_threshold(std::span<const double> errors);

// Average precision of `scores` (interval widths, larger ranks first) for
// detecting errors above `threshold`. Tied scores enter the ranking as one
// group: AP = sum over groups of (recall step) * (precision after the group).
// Throws UsageError when no error exceeds the threshold.
double auprc(std::span<const double> scores, std::span<const double> errors,
             double threshold);

enum class IntervalMethod { kDiscriminative, kNaive };
std::string to_string(IntervalMethod method);

struct EvalReport {
  std::string method = "dj";
  double coverage = 0.0;
  double mean_width = 0.0;
  double median_width = 0.0;
  Index vacuous_count = 0;
  std::optional<double> auprc;  // empty when the test errors have no positives
  double prevalence = 0.0;
  double threshold = 0.0;
  double mse = 0.0;
  double alpha = 0.1;
  int order = 2;
  std::string mode;
  std::string inverse_mode;
  double damping = 0.0;
  Index n_train = 0;
  Index n_test = 0;
  bool degenerate = false;
};

struct Evaluation {
  EvalReport report;
  std::vector<PredictionInterval> intervals;  // original units
  std::vector<double> errors;                 // squared errors, original units
};

// Intervals per test point (raw features/targets; the ensemble scaling is
// applied internally), then coverage, widths, MSE, threshold and AUPRC, all
// in original target units.
Evaluation evaluate(const LooEnsemble& ensemble, const Dataset& test,
                    double alpha,
                    IntervalMethod method = IntervalMethod::kDiscriminative);

nlohmann::ordered_json to_json(const EvalReport& report);
std::string csv_header(const EvalReport& report);
std::string csv_row(const EvalReport& report);

}  // namespace djack

#endif  // DJACK_EVAL_H_
