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

// Feed-forward scalar regression network, penalized squared loss, training.

#ifndef DJACK_MODEL_H_
#define DJACK_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "djack/data.h"

namespace djack {

using ParameterVector = Vector;
using GradVector = Vector;

enum class Activation { kTanh, kRelu };

std::string to_string(Activation activation);
Activation parse_activation(const std::string& text);

struct ModelSpec {
  int input_dim = 1;
  std::vector<int> hidden_layers{100};
  Activation activation = Activation::kTanh;
  double l2_penalty = 1e-4;

  void validate() const;
  // Stable one-line form, e.g. "d=1;hidden=100;act=tanh;l2=0x1.a36e2eb1c432dp-14".
  std::string canonical() const;
};

// Parameter layout: for each layer in order (hidden layers, then the scalar
// output layer) the weight matrix row-major as [out][in], then its biases.
class Network {
 public:
  struct Layer {
    int in = 0;
    int out = 0;
    Index weight_offset = 0;
    Index bias_offset = 0;
    bool hidden = true;
  };

  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  Index param_count() const { return param_count_; }
  std::span<const Layer> layers() const { return layers_; }
  // 1 on weight coordinates, 0 on biases.
  const Vector& weight_mask() const { return weight_mask_; }

  // Throws UsageError on dimension mismatch.
  double predict(const ParameterVector& params, std::span<const double> x) const;
  void check_params(const ParameterVector& params) const;
  void check_input(std::span<const double> x) const;

 private:
  ModelSpec spec_;
  std::vector<Layer> layers_;
  Index param_count_ = 0;
  Vector weight_mask_;
};

// Per-point loss (f(x) - y)^2 + penalty * ||weights||^2 where penalty is
// l2_penalty / n_nominal, so that n_nominal * L is the usual ridge-penalized
// sum. n_nominal stays at the full training-set size when points are removed.
class Objective {
 public:
  Objective(const ModelSpec& spec, Index n_nominal);

  const Network& net() const { return net_; }
  double penalty() const { return penalty_; }
  Index n_nominal() const { return n_nominal_; }

  // Same network, loss multiplied by `factor`.
  Objective scaled(double factor) const;
  double loss_scale() const { return loss_scale_; }

 private:
  Network net_;
  Index n_nominal_;
  double penalty_;
  double loss_scale_ = 1.0;
};

ParameterVector init_model(const ModelSpec& spec, std::uint64_t seed);

double predict(const Network& net, const ParameterVector& params,
               std::span<const double> x);
double loss_point(const Objective& objective, const ParameterVector& params,
                  std::span<const double> x, double y);
// Mean of loss_point over the data. Throws UsageError when empty.
double loss_total(const Objective& objective, const ParameterVector& params,
                  const Dataset& data);

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // Damped Newton refinement steps on the full objective after Adam.
  int polish_steps = 0;

  void validate() const;
};

struct TrainResult {
  ParameterVector params;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
};

// Adam from init_model(spec, cfg.seed); minibatches follow one permutation
// per epoch drawn from a stream derived from cfg.seed. Throws NumericalError
// naming the epoch if the loss becomes non-finite.
TrainResult train(const ModelSpec& spec, const Dataset& data,
                  const TrainConfig& cfg);

// Same initialization, permutations and batch boundaries as `train` on the
// full data, with the point `skip` dropped from whichever batch holds it. The
// penalty keeps n_nominal = data.size().
TrainResult train_without(const ModelSpec& spec, const Dataset& data,
                          const TrainConfig& cfg, Index skip);

}  // namespace djack

#endif  // DJACK_MODEL_H_
