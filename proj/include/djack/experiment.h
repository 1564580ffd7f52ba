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

// End-to-end experiment runs shared by the command-line tool and the
// acceptance suite: generate or split data, standardize, train, build the
// leave-one-out ensemble and evaluate.

#ifndef DJACK_EXPERIMENT_H_
#define DJACK_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "djack/data.h"
#include "djack/eval.h"
#include "djack/influence.h"
#include "djack/model.h"

namespace djack {

struct PipelineConfig {
  ModelSpec spec;
  TrainConfig train;
  EnsembleConfig ensemble;
  double alpha = 0.1;
  bool standardize = true;
};

struct RunResult {
  Dataset train;  // raw units
  Dataset test;   // raw units
  TrainResult fit;
  LooEnsemble ensemble;
  Evaluation dj;
  Evaluation naive;
};

// Train on `train`, evaluate on `test`. The spec's input_dim is taken from
// the data.
RunResult run_pipeline(const Dataset& train, const Dataset& test,
                       PipelineConfig config);

// Training draw from `data`; the test draw uses the same generator with
// n_test points and the seed mix_seed(data.seed, 1).
RunResult run_synthetic(const SyntheticConfig& data, Index n_test,
                        const PipelineConfig& config);

Dataset synthetic_test_draw(const SyntheticConfig& data, Index n_test);

struct BandPoint {
  double x = 0.0;
  double prediction = 0.0;
  PredictionInterval dj;
};

// Prediction curve and interval band on an even grid over [lo, hi], raw units,
// for one-dimensional inputs.
std::vector<BandPoint> prediction_band(const LooEnsemble& ensemble, double lo,
                                       double hi, int points, double alpha);

enum class SweepAxis { kNoiseVar, kTrainSize, kAlpha };
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kNoiseVar;
  std::vector<double> values;
  int seeds = 10;
  int jobs = 1;
  SyntheticConfig data;  // data.seed is the first seed
  Index n_test = 100;
  PipelineConfig pipeline;
};

struct SweepRow {
  double value = 0.0;
  int seeds = 0;
  double mean_width = 0.0;   // seed average of per-run mean widths
  double coverage = 0.0;     // pooled over all test points
  double naive_width = 0.0;
  Index vacuous = 0;
};

// One synthetic run per (value, seed); seed k uses data.seed + k for both the
// data and the training stream. Rows follow the order of `values`.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

}  // namespace djack

#endif  // DJACK_EXPERIMENT_H_
