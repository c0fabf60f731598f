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

// Differentially private gradient aggregation: per-example clipping to a
// global L2 norm, Gaussian noise on the clipped sum, and averaging.

#ifndef EHRGAN_DP_H_
#define EHRGAN_DP_H_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ehrgan/autodiff.h"

#include "ehrgan/optimizer.h"
#include "ehrgan/param_set.h"
#include "ehrgan/rng.h"

namespace ehrgan {

inline constexpr double kNoClipping = std::numeric_limits<double>::infinity();

struct DpConfig {
  double clip_norm = 1.0;         // kNoClipping disables clipping
  double noise_multiplier = 1.0;  // 0 disables noise
  double target_epsilon = 1.0;    // +inf never exhausts the budget
  double delta = 1e-5;

  void validate() const;
  friend bool operator==(const DpConfig&, const DpConfig&) = default;
};

// Scales `g` in place by min(1, C / ||g||), the norm taken over every
// component of every tensor. Returns the norm before clipping.
double clip_per_example(ParamSet& g, double clip_norm);

// sum += g, component-wise.
void accumulate(ParamSet& sum, const ParamSet& g);

// (sum + N(0, (sigma C)^2 I)) / batch_size, in place. The Gaussian draws come
// from `rng` in parameter order. sigma == 0 adds nothing.
void noise_and_average(ParamSet& sum, std::size_t batch_size, double clip_norm,
                       double noise_multiplier, Rng& rng);

// Clipped per-example gradients -> noisy mean gradient.
ParamSet noisy_mean(std::span<const ParamSet> clipped, double clip_norm,
                    double noise_multiplier, Rng& rng);

// Sum over the examples of a batch of their clipped gradients, computed from
// a single factored backward pass of `objective` (see
// Tape::factored_gradients). Example i's gradient is taken to be
// `example_scale` times its share of d objective / d params, so for a mean
// over B examples pass B. Per-example norms are exact; they are written to
// `norms` when given.
ParamSet clipped_gradient_sum(ad::Tape& tape, ad::Var objective, const ParamSet& like,
                              std::span<const ad::Var> bound, double example_scale,
                              double clip_norm, std::vector<double>* norms = nullptr);

// Adam applied to the privatized gradient. Identical to Optimizer::step; the
// privacy comes entirely from how `noisy_gradient` was formed.
void dp_adam_step(Optimizer& adam, ParamSet& params, const ParamSet& noisy_gradient);

}  // namespace ehrgan

#endif  // EHRGAN_DP_H_
