// Copyright 2026 The ehrgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ehrgan/mlp.h"

#include <cmath>

#include "ehrgan/errors.h"

namespace ehrgan {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw ConfigError("unknown activation: " + s);
}

void MlpSpec::validate() const {
  if (sizes.size() < 2) throw ConfigError("mlp: need at least input and output sizes");
  if (activations.size() != layers()) {
    throw ConfigError("mlp: " + std::to_string(activations.size()) +
                      " activations for " + std::to_string(layers()) + " layers");
  }
  for (std::size_t s : sizes) {
    if (s == 0) throw ConfigError("mlp: zero-width layer");
  }
}

ParamSet init_mlp(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  ParamSet p;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t fan_in = spec.sizes[l];
    const std::size_t fan_out = spec.sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w(fan_in, fan_out);
    for (double& v : w.values()) v = uniform(rng, -limit, limit);
    p.add("W" + std::to_string(l), std::move(w));
    p.add("b" + std::to_string(l), Tensor(1, fan_out));
  }
  return p;
}

namespace {

ad::Var apply(Activation a, ad::Var x) {
  switch (a) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return ad::relu(x);
    case Activation::kSigmoid: return ad::sigmoid(x);
  }
  return x;
}

ad::Var forward_impl(std::span<const ad::Var> params, ad::Var input,
                     std::span<const Activation> activations, bool final_activation) {
  if (params.size() != 2 * activations.size()) {
    throw ConfigError("forward_mlp: " + std::to_string(params.size()) +
                      " parameter tensors for " + std::to_string(activations.size()) +
                      " layers");
  }
  ad::Var h = input;
  for (std::size_t l = 0; l < activations.size(); ++l) {
    const ad::Var& w = params[2 * l];
    const ad::Var& b = params[2 * l + 1];
    if (h.cols() != w.rows()) {
      throw DimensionError("forward_mlp: layer " + std::to_string(l) + " expects " +
                           std::to_string(w.rows()) + " input columns, got " +
                           std::to_string(h.cols()));
    }
    if (b.rows() != 1 || b.cols() != w.cols()) {
      throw DimensionError("forward_mlp: layer " + std::to_string(l) +
                           " bias shape " + b.value().shape_string() +
                           " does not match weight " + w.value().shape_string());
    }
    h = ad::add_bias(ad::matmul(h, w), b);
    const bool last = l + 1 == activations.size();
    if (!last || final_activation) h = apply(activations[l], h);
  }
  return h;
}

}  // namespace

ad::Var forward_mlp(std::span<const ad::Var> params, ad::Var input,
                    std::span<const Activation> activations) {
  return forward_impl(params, input, activations, true);
}

ad::Var forward_mlp_logits(std::span<const ad::Var> params, ad::Var input,
                           std::span<const Activation> activations) {
  return forward_impl(params, input, activations, false);
}

Tensor predict_mlp(const ParamSet& params, const Tensor& input,
                   std::span<const Activation> activations) {
  constexpr std::size_t kChunk = 1024;
  if (params.empty()) throw ConfigError("predict_mlp: empty parameter set");
  Tensor out(input.rows(), params[params.size() - 1].cols());
  for (std::size_t start = 0; start < input.rows(); start += kChunk) {
    const std::size_t n = std::min(kChunk, input.rows() - start);
    Tensor chunk(n, input.cols(),
                 std::vector<double>(input.data() + start * input.cols(),
                                     input.data() + (start + n) * input.cols()));
    ad::Tape tape;
    auto bound = bind(tape, params);
    ad::Var y = forward_mlp(bound, tape.leaf(std::move(chunk)), activations);
    const Tensor& v = y.value();
    std::copy(v.data(), v.data() + v.size(), out.data() + start * v.cols());
  }
  return out;
}

}  // namespace ehrgan
