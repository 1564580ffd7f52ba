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

// djack: discriminative jackknife intervals from the command line.
//
//   djack synth         synthetic y = x^3 + noise run with a band plot
//   djack run           CSV data, 80/20 split
//   djack oracle-check  influence approximation against ridge and retraining
//   djack sweep         mean width and coverage over sigma2, n or alpha
//
// Every option can also come from a flat key=value file given by --config;
// flags override it. The resolved settings are written to config.ini in the
// output directory and reproduce the run when passed back through --config.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "djack/artifact.h"
#include "djack/data.h"
#include "djack/error.h"
#include "djack/experiment.h"
#include "djack/plot.h"
#include "djack/validation.h"

namespace fs = std::filesystem;
using djack::Index;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitUsage = 2;

constexpr Index kOracleMaxN = 200;
constexpr int kOracleMaxHidden = 16;

struct Settings {
  // shared
  std::uint64_t seed = 0;
  std::string out = "djack-out";
  std::string hidden = "100";
  std::string activation = "tanh";
  double l2 = 1e-4;
  int epochs = 1000;
  int batch_size = 100;
  double lr = 1e-3;
  int polish_steps = 0;
  int m = 2;
  std::string mode = "full";
  std::string signs = "a8";
  std::string inverse = "dense";
  double damping = 1e-3;
  int depth = 100;
  long long subsample = 0;
  double scale = 0.0;
  int repeats = 4;
  int threads = 1;
  double alpha = 0.1;
  bool standardize = true;
  // synthetic data
  std::string dist = "uniform";
  double xbar = 1.0;
  double sigmax = 1.0;
  double sigma2 = 1.0;
  long long n = 100;
  long long n_test = 100;
  // run
  std::string data;
  double test_frac = 0.2;
  // oracle-check
  long long ridge_n = 200;
  int ridge_d = 5;
  double ridge_lambda = 1.0;
  // sweep
  std::string param;
  std::string values;
  int seeds = 10;
  int jobs = 1;
};

// Option names accepted by each subcommand (long names without dashes).
const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::set<std::string> model = {
      "seed",  "out",   "hidden",       "activation", "l2",    "epochs",
      "batch-size", "lr", "polish-steps", "m",     "mode",  "signs",
      "inverse", "damping", "depth", "subsample", "scale", "repeats",
      "threads", "alpha", "standardize"};
  static const std::set<std::string> synthetic = {"dist", "xbar", "sigmax",
                                                  "sigma2", "n", "n-test"};
  static const auto join = [](std::initializer_list<std::set<std::string>> sets) {
    std::set<std::string> out;
    for (const auto& s : sets) out.insert(s.begin(), s.end());
    return out;
  };
  static const std::map<std::string, std::set<std::string>> keys = {
      {"synth", join({model, synthetic})},
      {"run", join({model, {"data", "test-frac"}})},
      {"oracle-check",
       join({model, synthetic, {"ridge-n", "ridge-d", "ridge-lambda"}})},
      {"sweep", join({model, synthetic, {"param", "values", "seeds", "jobs"}})},
  };
  return keys;
}

void add_options(CLI::App& app, Settings& s) {
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", s.seed, "Seed for data, initialization and batches");
  app.add_option("--out", s.out, "Output directory");
  app.add_option("--hidden", s.hidden, "Hidden layer widths, comma separated");
  app.add_option("--activation", s.activation, "tanh or relu");
  app.add_option("--l2", s.l2, "L2 penalty on weights (sum-loss scale)");
  app.add_option("--epochs", s.epochs, "Adam epochs");
  app.add_option("--batch-size", s.batch_size, "Minibatch size");
  app.add_option("--lr", s.lr, "Adam step size");
  app.add_option("--polish-steps", s.polish_steps,
                 "Newton refinement steps after Adam");
  app.add_option("--m", s.m, "Influence order, 1 or 2");
  app.add_option("--mode", s.mode, "Second-order term: full or main_text");
  app.add_option("--signs", s.signs, "Second-order sign: a8 or alg1");
  app.add_option("--inverse", s.inverse, "Inverse Hessian: dense or stochastic");
  app.add_option("--damping", s.damping, "Damping added to the Hessian");
  app.add_option("--depth", s.depth, "Stochastic recursion depth");
  app.add_option("--subsample", s.subsample,
                 "Stochastic Hessian subsample size (0: min(n, 32))");
  app.add_option("--scale", s.scale, "Stochastic scale c (0: automatic)");
  app.add_option("--repeats", s.repeats, "Stochastic repeats averaged");
  app.add_option("--threads", s.threads, "Worker threads for influence work");
  app.add_option("--alpha", s.alpha, "Miscoverage level");
  app.add_option("--standardize", s.standardize,
                 "Standardize features and targets for training");
  app.add_option("--dist", s.dist, "Synthetic features: uniform or normal");
  app.add_option("--xbar", s.xbar, "Uniform feature half-width");
  app.add_option("--sigmax", s.sigmax, "Normal feature standard deviation");
  app.add_option("--sigma2", s.sigma2, "Noise variance");
  app.add_option("--n", s.n, "Training points");
  app.add_option("--n-test", s.n_test, "Test points (synthetic)");
  app.add_option("--data", s.data, "CSV file, last column is the target");
  app.add_option("--test-frac", s.test_frac, "Test fraction for run");
  app.add_option("--ridge-n", s.ridge_n, "Ridge oracle training points");
  app.add_option("--ridge-d", s.ridge_d, "Ridge oracle feature count");
  app.add_option("--ridge-lambda", s.ridge_lambda, "Ridge oracle penalty");
  app.add_option("--param", s.param, "Sweep axis: sigma2, n or alpha");
  app.add_option("--values", s.values, "Sweep values, comma separated");
  app.add_option("--seeds", s.seeds, "Seeds per sweep value");
  app.add_option("--jobs", s.jobs, "Concurrent sweep runs");
}

std::string option_key(const CLI::Option* opt) {
  const auto& names = opt->get_lnames();
  return names.empty() ? std::string() : names.front();
}

void check_keys(const CLI::App& app, const std::string& command) {
  const auto& allowed = allowed_keys().at(command);
  for (const CLI::Option* opt : app.get_options()) {
    const std::string key = option_key(opt);
    if (key.empty() || key == "help" || key == "config") continue;
    if (opt->count() > 0 && !allowed.count(key)) {
      throw djack::UsageError("option '" + key + "' does not apply to " + command);
    }
  }
}

// key=value for every option of the subcommand, in registration order.
std::string resolved_config(const CLI::App& app, const std::string& command) {
  const auto& allowed = allowed_keys().at(command);
  std::ostringstream out;
  out << "# djack " << command << "\n";
  for (const CLI::Option* opt : app.get_options()) {
    const std::string key = option_key(opt);
    if (!allowed.count(key)) continue;
    std::string value = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
    out << key << "=" << value << "\n";
  }
  return out.str();
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw djack::UsageError("bad " + what + " entry '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw djack::UsageError("bad " + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw djack::UsageError(what + " is empty");
  return out;
}

djack::ModelSpec model_spec(const Settings& s) {
  djack::ModelSpec spec;
  spec.hidden_layers = s.hidden.empty() ? std::vector<int>{}
                                        : parse_int_list(s.hidden, "hidden");
  spec.activation = djack::parse_activation(s.activation);
  spec.l2_penalty = s.l2;
  return spec;
}

djack::TrainConfig train_config(const Settings& s) {
  djack::TrainConfig cfg;
  cfg.epochs = s.epochs;
  cfg.batch_size = s.batch_size;
  cfg.learning_rate = s.lr;
  cfg.seed = s.seed;
  cfg.polish_steps = s.polish_steps;
  cfg.validate();
  return cfg;
}

djack::InverseHvpConfig inverse_config(const Settings& s) {
  djack::InverseHvpConfig cfg;
  cfg.mode = djack::parse_inverse_hvp_mode(s.inverse);
  cfg.recursion_depth = s.depth;
  cfg.subsample_size = static_cast<Index>(s.subsample);
  cfg.damping = s.damping;
  cfg.scale = s.scale;
  cfg.repeats = s.repeats;
  cfg.seed = s.seed;
  cfg.validate();
  return cfg;
}

djack::PipelineConfig pipeline_config(const Settings& s) {
  djack::PipelineConfig cfg;
  cfg.spec = model_spec(s);
  cfg.train = train_config(s);
  cfg.ensemble.order = s.m;
  cfg.ensemble.mode = djack::parse_second_order_mode(s.mode);
  cfg.ensemble.signs = djack::parse_sign_convention(s.signs);
  cfg.ensemble.inverse = inverse_config(s);
  cfg.ensemble.threads = s.threads;
  cfg.alpha = s.alpha;
  cfg.standardize = s.standardize;
  if (s.m != 1 && s.m != 2) throw djack::UsageError("--m must be 1 or 2");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) {
    throw djack::UsageError("--alpha must lie in (0, 1)");
  }
  return cfg;
}

djack::SyntheticConfig synthetic_config(const Settings& s) {
  djack::SyntheticConfig cfg;
  cfg.n = static_cast<Index>(s.n);
  cfg.dist = djack::parse_feature_distribution(s.dist);
  cfg.xbar = s.xbar;
  cfg.sigma_x = s.sigmax;
  cfg.noise_var = s.sigma2;
  cfg.seed = s.seed;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw djack::IoError("cannot write " + path.string());
}

fs::path prepare_out(const Settings& s, const CLI::App& app,
                     const std::string& command) {
  const fs::path dir(s.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw djack::IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "config.ini", resolved_config(app, command));
  return dir;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string intervals_csv(const djack::Dataset& test,
                          const djack::Evaluation& eval) {
  std::ostringstream out;
  out << "id";
  const auto names = test.resolved_columns();
  for (std::size_t c = 0; c < names.size(); ++c) {
    out << ',' << (c + 1 < names.size() ? names[c] : std::string("y"));
  }
  out << ",lower,upper,center,width,alpha,vacuous\n";
  for (Index i = 0; i < test.size(); ++i) {
    const auto& iv = eval.intervals[static_cast<std::size_t>(i)];
    out << i;
    for (const double v : test.row(i)) out << ',' << num(v);
    out << ',' << num(test.targets(i)) << ',' << num(iv.lower) << ','
        << num(iv.upper) << ',' << num(iv.center) << ',' << num(iv.width) << ','
        << num(iv.alpha) << ',' << (iv.vacuous() ? 1 : 0) << '\n';
  }
  return out.str();
}

ordered_json run_report(const djack::RunResult& run) {
  ordered_json j;
  j["dj"] = djack::to_json(run.dj.report);
  j["naive"] = djack::to_json(run.naive.report);
  j["train"] = {{"final_loss", run.fit.final_loss},
                {"final_grad_norm", run.fit.final_grad_norm},
                {"clamped_eigenvalues", run.ensemble.clamped_eigenvalues}};
  if (run.ensemble.scaling) {
    j["warnings"] = run.ensemble.scaling->warnings;
  }
  return j;
}

void write_run_outputs(const fs::path& dir, const djack::RunResult& run) {
  write_text(dir / "report.json", run_report(run).dump(2) + "\n");
  write_text(dir / "intervals.csv", intervals_csv(run.test, run.dj));
  djack::save_ensemble(run.ensemble, dir / "ensemble.txt");
}

void print_summary(const djack::RunResult& run, const fs::path& dir) {
  const auto& r = run.dj.report;
  std::printf("coverage %.4f  mean width %.4g  auprc %s  prevalence %.3f  -> %s\n",
              r.coverage, r.mean_width,
              r.auprc ? num(*r.auprc).substr(0, 6).c_str() : "undefined",
              r.prevalence, dir.string().c_str());
}

int cmd_synth(const Settings& s, const CLI::App& app) {
  const auto data_cfg = synthetic_config(s);
  const auto pipeline = pipeline_config(s);
  const fs::path dir = prepare_out(s, app, "synth");
  const djack::RunResult run = djack::run_synthetic(
      data_cfg, static_cast<Index>(s.n_test), pipeline);
  write_run_outputs(dir, run);

  std::ostringstream train_csv;
  train_csv << "x,y\n";
  double lo = run.train.features(0, 0), hi = lo;
  for (Index i = 0; i < run.train.size(); ++i) {
    const double x = run.train.features(i, 0);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    train_csv << num(x) << ',' << num(run.train.targets(i)) << '\n';
  }
  if (!(lo < hi)) hi = lo + 1.0;
  const auto band = djack::prediction_band(run.ensemble, lo, hi, 200, s.alpha);
  std::ostringstream band_csv;
  band_csv << "x,prediction,lower,upper\n";
  for (const auto& p : band) {
    band_csv << num(p.x) << ',' << num(p.prediction) << ',' << num(p.dj.lower)
             << ',' << num(p.dj.upper) << '\n';
  }
  write_text(dir / "train.csv", train_csv.str());
  write_text(dir / "band.csv", band_csv.str());
  const std::string title = s.dist + " features, sigma2=" + num(s.sigma2) +
                            ", alpha=" + num(s.alpha) + ", m=" + std::to_string(s.m);
  write_text(dir / "plot.svg",
             djack::band_svg(djack::read_csv_table(dir / "band.csv"),
                             djack::read_csv_table(dir / "train.csv"), title));
  print_summary(run, dir);
  return kExitOk;
}

int cmd_run(const Settings& s, const CLI::App& app) {
  if (s.data.empty()) throw djack::UsageError("run needs --data");
  const auto pipeline = pipeline_config(s);
  const djack::Dataset data = djack::load_csv(s.data);
  const djack::Split parts = djack::split(data, s.test_frac, s.seed);
  const fs::path dir = prepare_out(s, app, "run");
  const djack::RunResult run = djack::run_pipeline(parts.train, parts.test, pipeline);
  write_run_outputs(dir, run);
  print_summary(run, dir);
  return kExitOk;
}

int cmd_oracle_check(const Settings& s, const CLI::App& app) {
  if (s.n > kOracleMaxN) {
    throw djack::UsageError("oracle-check allows --n <= " +
                            std::to_string(kOracleMaxN));
  }
  const auto hidden = model_spec(s).hidden_layers;
  for (const int w : hidden) {
    if (w > kOracleMaxHidden) {
      throw djack::UsageError("oracle-check allows hidden widths <= " +
                              std::to_string(kOracleMaxHidden));
    }
  }
  const auto data_cfg = synthetic_config(s);
  const auto pipeline = pipeline_config(s);
  const fs::path dir = prepare_out(s, app, "oracle-check");

  djack::RidgeCheckConfig ridge;
  ridge.n = static_cast<Index>(s.ridge_n);
  ridge.dim = s.ridge_d;
  ridge.lambda = s.ridge_lambda;
  ridge.seed = s.seed;
  const djack::RidgeCheck ridge_result = djack::ridge_influence_check(ridge);

  djack::RetrainCheckConfig net;
  net.spec = pipeline.spec;
  net.train = pipeline.train;
  net.inverse = pipeline.ensemble.inverse;
  net.mode = pipeline.ensemble.mode;
  net.threads = s.threads;
  const djack::Dataset data = djack::gen_synthetic(data_cfg);
  const djack::RetrainCheck net_result = djack::retrain_check(data, net);

  const bool alg1 = pipeline.ensemble.signs == djack::SignConvention::kAlgorithm1;
  const double m2 = alg1 ? net_result.median_alg1 : net_result.median_second;
  const bool second_helps = m2 <= net_result.median_first;
  const bool ridge_ok = ridge_result.relative <= 1e-2;

  ordered_json j;
  j["ridge"] = djack::to_json(ridge_result);
  j["ridge"]["pass"] = ridge_ok;
  j["net"] = djack::to_json(net_result);
  j["net"]["signs"] = s.signs;
  j["net"]["median_error_selected_m2"] = m2;
  j["net"]["second_order_helps"] = second_helps;
  write_text(dir / "oracle.json", j.dump(2) + "\n");

  std::printf("ridge: max |influence - closed form| / sd(y) = %.3g (%s)\n",
              ridge_result.relative, ridge_ok ? "ok" : "above 1e-2");
  std::printf("net: median error m=1 %.4g, m=2 (%s) %.4g -> %s\n",
              net_result.median_first, s.signs.c_str(), m2,
              second_helps ? "second order helps" : "second order does not help");
  return second_helps ? kExitOk : kExitPropertyFailure;
}

int cmd_sweep(const Settings& s, const CLI::App& app) {
  djack::SweepConfig cfg;
  if (s.param.empty()) throw djack::UsageError("sweep needs --param");
  cfg.axis = djack::parse_sweep_axis(s.param);
  cfg.values = parse_double_list(s.values, "--values");
  cfg.seeds = s.seeds;
  cfg.jobs = s.jobs;
  cfg.data = synthetic_config(s);
  cfg.n_test = static_cast<Index>(s.n_test);
  cfg.pipeline = pipeline_config(s);
  const fs::path dir = prepare_out(s, app, "sweep");
  const auto rows = djack::run_sweep(cfg);
  write_text(dir / "sweep.csv", djack::sweep_csv(cfg.axis, rows));
  const double target = cfg.axis == djack::SweepAxis::kAlpha ? -1.0 : 1.0 - s.alpha;
  write_text(dir / "sweep.svg",
             djack::sweep_svg(djack::read_csv_table(dir / "sweep.csv"), s.param,
                              target));
  for (const auto& r : rows) {
    std::printf("%s=%-8g mean width %.4g  coverage %.4f\n", s.param.c_str(),
                r.value, r.mean_width, r.coverage);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discriminative jackknife intervals for regression networks"};
  app.name("djack");
  Settings settings;
  add_options(app, settings);
  app.set_config("--config", "", "Flat key=value settings file");
  app.allow_config_extras(false);
  app.require_subcommand(1, 1);
  app.fallthrough();
  const std::map<std::string, int (*)(const Settings&, const CLI::App&)> commands = {
      {"synth", cmd_synth},
      {"run", cmd_run},
      {"oracle-check", cmd_oracle_check},
      {"sweep", cmd_sweep}};
  const std::map<std::string, std::string> help = {
      {"synth", "Synthetic cubic data: train, build intervals, plot"},
      {"run", "CSV data: split, train, build intervals"},
      {"oracle-check", "Influence approximation against ridge and retraining"},
      {"sweep", "Width and coverage over sigma2, n or alpha"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    check_keys(app, command);
    return commands.at(command)(settings, app);
  } catch (const djack::UsageError& e) {
    std::fprintf(stderr, "djack %s: %s\n", command.c_str(), e.what());
    return kExitUsage;
  } catch (const djack::IoError& e) {
    std::fprintf(stderr, "djack %s: %s\n", command.c_str(), e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "djack %s: %s\n", command.c_str(), e.what());
    return kExitPropertyFailure;
  }
}
