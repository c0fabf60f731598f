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

// Fully connected networks: a stack of (W_l, b_l) layers, each followed by
// an activation. Parameters are named "W<l>" / "b<l>".

#ifndef EHRGAN_MLP_H_
#define EHRGAN_MLP_H_

#include <span>
#include <string>
#include <vector>

#include "ehrgan/autodiff.h"
#include "ehrgan/param_set.h"
#include "ehrgan/rng.h"

namespace ehrgan {

enum class Activation { kIdentity, kRelu, kSigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpSpec {
  // Layer widths including input and output: {in, h1, ..., out}.
  std::vector<std::size_t> sizes;
  // One per weight layer (sizes.size() - 1 entries).
  std::vector<Activation> activations;

  std::size_t layers() const { return sizes.empty() ? 0 : sizes.size() - 1; }
  void validate() const;
};

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
ParamSet init_mlp(const MlpSpec& spec, Rng& rng);

// Records the forward pass on the input's tape. `params` are the bound
// parameter Vars in W0, b0, W1, b1, ... order.
ad::Var forward_mlp(std::span<const ad::Var> params, ad::Var input,
                    std::span<const Activation> activations);

// Same, but stops before the last activation (returns the pre-activation of
// the output layer). Used where the loss is computed from logits.
ad::Var forward_mlp_logits(std::span<const ad::Var> params, ad::Var input,
                           std::span<const Activation> activations);

// Tape-free inference, batched in chunks of rows.
Tensor predict_mlp(const ParamSet& params, const Tensor& input,
                   std::span<const Activation> activations);

}  // namespace ehrgan

#endif  // EHRGAN_MLP_H_
