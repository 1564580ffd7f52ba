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

#include "djack/model.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "backprop.h"
#include "djack/error.h"
#include "djack/rng.h"

namespace djack {

std::string to_string(Activation activation) {
  return activation == Activation::kTanh ? "tanh" : "relu";
}

Activation parse_activation(const std::string& text) {
  if (text == "tanh") return Activation::kTanh;
  if (text == "relu") return Activation::kRelu;
  throw UsageError("unknown activation '" + text + "'");
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw UsageError("input_dim must be positive");
  for (const int width : hidden_layers) {
    if (width < 1) throw UsageError("hidden layer sizes must be positive");
  }
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) {
    throw UsageError("l2_penalty must be a finite non-negative number");
  }
}

std::string ModelSpec::canonical() const {
  std::ostringstream out;
  out << "d=" << input_dim << ";hidden=";
  for (std::size_t i = 0; i < hidden_layers.size(); ++i) {
    out << (i ? "," : "") << hidden_layers[i];
  }
  char l2[40];
  std::snprintf(l2, sizeof(l2), "%a", l2_penalty);
  out << ";act=" << to_string(activation) << ";l2=" << l2;
  return out.str();
}

Network::Network(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  int in = spec_.input_dim;
  Index offset = 0;
  std::vector<int> widths = spec_.hidden_layers;
  widths.push_back(1);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    Layer layer;
    layer.in = in;
    layer.out = widths[l];
    layer.hidden = l + 1 < widths.size();
    layer.weight_offset = offset;
    offset += static_cast<Index>(layer.in) * layer.out;
    layer.bias_offset = offset;
    offset += layer.out;
    layers_.push_back(layer);
    in = layer.out;
  }
  param_count_ = offset;
  weight_mask_ = Vector::Zero(param_count_);
  for (const auto& layer : layers_) {
    weight_mask_.segment(layer.weight_offset,
                         static_cast<Index>(layer.in) * layer.out)
        .setOnes();
  }
}

void Network::check_params(const ParameterVector& params) const {
  if (params.size() != param_count_) {
    throw UsageError("parameter vector has length " +
                     std::to_string(params.size()) + ", network expects " +
                     std::to_string(param_count_));
  }
}

void Network::check_input(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != spec_.input_dim) {
    throw UsageError("input has dimension " + std::to_string(x.size()) +
                     ", network expects " + std::to_string(spec_.input_dim));
  }
}

double Network::predict(const ParameterVector& params,
                        std::span<const double> x) const {
  check_params(params);
  check_input(x);
  internal::Workspace<double> ws;
  return internal::forward(*this, params.data(), x, ws);
}

Objective::Objective(const ModelSpec& spec, Index n_nominal)
    : net_(spec), n_nominal_(n_nominal) {
  if (n_nominal < 1) throw UsageError("n_nominal must be positive");
  penalty_ = spec.l2_penalty / static_cast<double>(n_nominal);
}

Objective Objective::scaled(double factor) const {
  if (!(factor > 0.0)) throw UsageError("loss scale must be positive");
  Objective out = *this;
  out.loss_scale_ *= factor;
  return out;
}

ParameterVector init_model(const ModelSpec& spec, std::uint64_t seed) {
  const Network net(spec);
  Rng rng(mix_seed(seed, 0));
  ParameterVector params = ParameterVector::Zero(net.param_count());
  for (const auto& layer : net.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    const Index count = static_cast<Index>(layer.in) * layer.out;
    for (Index k = 0; k < count; ++k) {
      params(layer.weight_offset + k) = rng.uniform(-bound, bound);
    }
  }
  return params;
}

double predict(const Network& net, const ParameterVector& params,
               std::span<const double> x) {
  return net.predict(params, x);
}

double loss_point(const Objective& objective, const ParameterVector& params,
                  std::span<const double> x, double y) {
  const double f = objective.net().predict(params, x);
  const double wsq = params.cwiseProduct(objective.net().weight_mask()).squaredNorm();
  return objective.loss_scale() *
         ((f - y) * (f - y) + objective.penalty() * wsq);
}

double loss_total(const Objective& objective, const ParameterVector& params,
                  const Dataset& data) {
  if (data.size() == 0) throw UsageError("loss_total on an empty dataset");
  const auto& net = objective.net();
  net.check_params(params);
  if (data.dim() != net.spec().input_dim) {
    throw UsageError("dataset dimension does not match the network");
  }
  internal::Workspace<double> ws;
  double sum = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const double r = internal::forward(net, params.data(), data.row(i), ws) -
                     data.targets(i);
    sum += r * r;
  }
  const double wsq = params.cwiseProduct(net.weight_mask()).squaredNorm();
  return objective.loss_scale() *
         (sum / static_cast<double>(data.size()) + objective.penalty() * wsq);
}

}  // namespace djack
