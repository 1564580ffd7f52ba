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

#include "djack/experiment.h"

#include <cmath>
#include <cstdio>

#include "djack/error.h"
#include "djack/jackknife.h"
#include "djack/parallel.h"
#include "djack/rng.h"

namespace djack {

RunResult run_pipeline(const Dataset& train, const Dataset& test,
                       PipelineConfig config) {
  train.validate();
  test.validate();
  if (train.dim() != test.dim()) {
    throw UsageError("train and test feature counts differ");
  }
  config.spec.input_dim = static_cast<int>(train.dim());

  RunResult out;
  out.train = train;
  out.test = test;
  if (config.standardize) {
    StandardizedSplit scaled = standardize(train, test);
    out.fit = djack::train(config.spec, scaled.train, config.train);
    out.ensemble = build_loo_ensemble(config.spec, out.fit.params, scaled.train,
                                      config.ensemble);
    out.ensemble.scaling = scaled.transform;
  } else {
    out.fit = djack::train(config.spec, train, config.train);
    out.ensemble =
        build_loo_ensemble(config.spec, out.fit.params, train, config.ensemble);
  }
  out.dj = evaluate(out.ensemble, test, config.alpha,
                    IntervalMethod::kDiscriminative);
  out.naive = evaluate(out.ensemble, test, config.alpha, IntervalMethod::kNaive);
  return out;
}

Dataset synthetic_test_draw(const SyntheticConfig& data, Index n_test) {
  SyntheticConfig test = data;
  test.n = n_test;
  test.seed = mix_seed(data.seed, 1);
  return gen_synthetic(test);
}

RunResult run_synthetic(const SyntheticConfig& data, Index n_test,
                        const PipelineConfig& config) {
  return run_pipeline(gen_synthetic(data), synthetic_test_draw(data, n_test),
                      config);
}

std::vector<BandPoint> prediction_band(const LooEnsemble& ensemble, double lo,
                                       double hi, int points, double alpha) {
  if (ensemble.spec.input_dim != 1) {
    throw UsageError("prediction band needs one-dimensional inputs");
  }
  if (points < 2 || !(lo < hi)) throw UsageError("invalid band grid");
  std::vector<BandPoint> band;
  band.reserve(static_cast<std::size_t>(points));
  const Network net(ensemble.spec);
  for (int k = 0; k < points; ++k) {
    BandPoint point;
    point.x = lo + (hi - lo) * k / (points - 1);
    std::vector<double> x{point.x};
    if (ensemble.scaling) x = ensemble.scaling->features_to_model(x);
    point.dj = dj_interval(ensemble, x, alpha);
    if (ensemble.scaling) point.dj = to_original_units(point.dj, *ensemble.scaling);
    point.prediction = point.dj.center;
    band.push_back(point);
  }
  return band;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNoiseVar:
      return "sigma2";
    case SweepAxis::kTrainSize:
      return "n";
    case SweepAxis::kAlpha:
      return "alpha";
  }
  return "";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "sigma2") return SweepAxis::kNoiseVar;
  if (text == "n") return SweepAxis::kTrainSize;
  if (text == "alpha") return SweepAxis::kAlpha;
  throw UsageError("unknown sweep parameter '" + text +
                   "' (expected sigma2, n or alpha)");
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  if (config.values.empty()) throw UsageError("sweep needs at least one value");
  if (config.seeds < 1) throw UsageError("sweep needs seeds >= 1");
  for (const double v : config.values) {
    const bool ok = config.axis == SweepAxis::kTrainSize
                        ? v >= 2 && v == std::floor(v)
                        : config.axis == SweepAxis::kAlpha ? v > 0 && v < 1
                                                           : v >= 0;
    if (!std::isfinite(v) || !ok) {
      throw UsageError("invalid " + to_string(config.axis) + " value " +
                       std::to_string(v));
    }
  }
  const auto seeds = static_cast<std::size_t>(config.seeds);
  const Index jobs = static_cast<Index>(config.values.size() * seeds);
  std::vector<RunResult> runs(static_cast<std::size_t>(jobs));
  parallel_for(jobs, config.jobs, [&](Index job) {
    const auto k = static_cast<std::size_t>(job);
    const double value = config.values[k / seeds];
    SyntheticConfig data = config.data;
    data.seed = config.data.seed + k % seeds;
    PipelineConfig pipeline = config.pipeline;
    pipeline.train.seed = data.seed;
    switch (config.axis) {
      case SweepAxis::kNoiseVar:
        data.noise_var = value;
        break;
      case SweepAxis::kTrainSize:
        data.n = static_cast<Index>(value);
        break;
      case SweepAxis::kAlpha:
        pipeline.alpha = value;
        break;
    }
    RunResult run = run_synthetic(data, config.n_test, pipeline);
    // Only the reports and intervals are aggregated.
    run.ensemble = LooEnsemble{};
    runs[k] = std::move(run);
  });

  std::vector<SweepRow> rows;
  for (std::size_t v = 0; v < config.values.size(); ++v) {
    SweepRow row;
    row.value = config.values[v];
    row.seeds = config.seeds;
    Index covered = 0;
    Index total = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const RunResult& run = runs[v * seeds + s];
      row.mean_width += run.dj.report.mean_width / config.seeds;
      row.naive_width += run.naive.report.mean_width / config.seeds;
      row.vacuous += run.dj.report.vacuous_count;
      for (Index i = 0; i < run.test.size(); ++i) {
        covered += run.dj.intervals[static_cast<std::size_t>(i)].covers(
                       run.test.targets(i))
                       ? 1
                       : 0;
      }
      total += run.test.size();
    }
    row.coverage = static_cast<double>(covered) / static_cast<double>(total);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string out = "param,value,seeds,mean_width,coverage,naive_width,vacuous\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%d,%.17g,%.17g,%.17g,%lld\n",
                  to_string(axis).c_str(), r.value, r.seeds, r.mean_width,
                  r.coverage, r.naive_width, static_cast<long long>(r.vacuous));
    out += buf;
  }
  return out;
}

}  // namespace djack
