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

// Generator / critic networks and the three adversarial training variants:
// vanilla GAN, weight-clipped WGAN and WGAN with gradient penalty.

#ifndef EHRGAN_GAN_H_
#define EHRGAN_GAN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehrgan/accountant.h"
#include "ehrgan/autodiff.h"
#include "ehrgan/dp.h"
#include "ehrgan/mlp.h"
#include "ehrgan/optimizer.h"
#include "ehrgan/param_set.h"
#include "ehrgan/rng.h"
#include "ehrgan/tensor.h"
#include "json.hpp"

namespace ehrgan {

enum class Variant { kVanilla, kWganClip, kWganGp };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct GanConfig {
  std::size_t noise_dim = 100;
  std::vector<std::size_t> generator_hidden = {128, 256, 512};
  std::vector<std::size_t> critic_hidden = {512, 256, 128};
  std::size_t output_width = 0;
  Variant variant = Variant::kWganGp;
  std::size_t critic_steps = 5;  // critic steps per generator step
  std::size_t batch_size = 256;
  double clip_value = 0.01;      // wgan_clip
  double penalty_weight = 10.0;  // wgan_gp
  OptimizerConfig generator_optimizer;
  OptimizerConfig critic_optimizer;

  // Per-variant optimizer settings and step ratio.
  static GanConfig defaults(Variant variant, std::size_t output_width);
  void validate() const;

  MlpSpec generator_spec() const;
  MlpSpec critic_spec() const;

  friend bool operator==(const GanConfig&, const GanConfig&) = default;
};

nlohmann::json to_json(const GanConfig& c);
GanConfig gan_config_from_json(const nlohmann::json& j);

struct GanState {
  GanConfig config;
  ParamSet generator;
  ParamSet critic;
  Optimizer generator_optimizer;
  Optimizer critic_optimizer;
  std::uint64_t epoch = 0;
  std::uint64_t critic_updates = 0;
  std::uint64_t generator_updates = 0;
  Rng batch_rng;    // minibatch shuffling
  Rng noise_rng;    // generator input and interpolation weights
  Rng privacy_rng;  // Gaussian gradient noise

  friend bool operator==(const GanState&, const GanState&) = default;
};

GanState init_gan(const GanConfig& config, std::uint64_t seed);

// z ~ U(-1, 1)^{rows x dim}.
Tensor sample_noise(std::size_t rows, std::size_t dim, Rng& rng);

// n generator samples from noise seeded by `seed`. Entries lie strictly
// inside (0, 1).
Tensor generate(const GanState& state, std::size_t n, std::uint64_t seed);

// Raw critic scores (probabilities for vanilla, unbounded for WGAN).
Tensor critic_scores(const GanState& state, const Tensor& x);

struct LossPair {
  double critic = 0.0;
  double generator = 0.0;
};

// From discriminator probabilities: critic -mean log D(x) - mean log(1 - D(G(z))),
// generator -mean log D(G(z)).
LossPair vanilla_losses(std::span<const double> d_real, std::span<const double> d_fake);
// From critic scores: critic mean f(G(z)) - mean f(x), generator -mean f(G(z)).
LossPair wgan_losses(std::span<const double> f_real, std::span<const double> f_fake);

// Clamps every component to [-c, c].
void clip_weights(ParamSet& params, double c);

// u ~ U(0, 1), one per row.
Tensor interpolation_weights(std::size_t rows, Rng& rng);

// weight * mean_i (||grad_x f(x_i_hat)|| - 1)^2 with x_hat = u x + (1 - u) fake,
// recorded on the tape of `critic` so it can be differentiated again.
ad::Var gradient_penalty(ad::Tape& tape, std::span<const ad::Var> critic,
                         std::span<const Activation> activations, const Tensor& real,
                         const Tensor& fake, const Tensor& mix, double weight);
double gradient_penalty(const ParamSet& critic, std::span<const Activation> activations,
                        const Tensor& real, const Tensor& fake, double weight,
                        std::uint64_t seed);

// Critic objective for one batch (the variant decides which terms exist).
// `mix` is only read by wgan_gp.
ad::Var critic_objective(ad::Tape& tape, std::span<const ad::Var> critic,
                         const GanConfig& config, const Tensor& real, const Tensor& fake,
                         const Tensor& mix);

struct PrivacyLogRow {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  double sigma = 0.0;
  double sample_rate = 0.0;
  double clip_norm = 0.0;
  double epsilon = 0.0;
};

// DP state threaded through training. Only critic updates are privatized.
struct DpTraining {
  DpConfig config;
  AccountantState accountant;
  bool exhausted = false;
  // Clip with one tape per example instead of the factored batch pass.
  // Same result up to rounding; kept as the reference implementation.
  bool per_example_tapes = false;
  std::function<void(const PrivacyLogRow&)> on_step;
};

struct EpochSummary {
  std::uint64_t epoch = 0;
  std::size_t critic_steps = 0;
  std::size_t generator_steps = 0;
  std::vector<double> critic_losses;
  std::vector<double> generator_losses;
  bool budget_exhausted = false;

  double mean_critic_loss() const;
  double mean_generator_loss() const;
};

// One shuffled pass over `data` in full batches (the trailing partial batch
// is dropped; if rows < batch_size the batch shrinks to rows). A generator
// step follows every `critic_steps` critic steps. With `dp`, critic updates
// use per-example clipped, noised gradients and training halts right after
// the update whose accounted epsilon exceeds the target.
EpochSummary train_epoch(GanState& state, const Tensor& data, DpTraining* dp = nullptr);

// Single critic / generator updates (exposed for tests).
double critic_step(GanState& state, const Tensor& real, DpTraining* dp, double sample_rate);
double generator_step(GanState& state, std::size_t batch_size);

}  // namespace ehrgan

#endif  // EHRGAN_GAN_H_
