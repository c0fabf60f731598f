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

#include "ehrgan/gan.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

#include "ehrgan/errors.h"

namespace ehrgan {
namespace {

std::vector<Activation> generator_activations(const GanConfig& c) {
  return c.generator_spec().activations;
}

std::vector<Activation> critic_activations(const GanConfig& c) {
  return c.critic_spec().activations;
}

Tensor gather_rows(const Tensor& data, std::span<const std::size_t> rows) {
  Tensor out(rows.size(), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = data.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Tensor slice_row(const Tensor& t, std::size_t r) {
  auto src = t.row(r);
  return Tensor(1, t.cols(), std::vector<double>(src.begin(), src.end()));
}

void check_finite(double loss, const char* what, std::uint64_t step, Variant v) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite " << what << " loss " << loss << " at step " << step << " (variant "
        << to_string(v) << ")";
    throw TrainingError(msg.str());
  }
}

ad::Var mean_softplus(ad::Var logits, double sign) {
  return ad::mean(ad::softplus(ad::scale(logits, sign)));
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kVanilla: return "vanilla";
    case Variant::kWganClip: return "wgan_clip";
    case Variant::kWganGp: return "wgan_gp";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "vanilla") return Variant::kVanilla;
  if (s == "wgan_clip") return Variant::kWganClip;
  if (s == "wgan_gp") return Variant::kWganGp;
  throw ConfigError("unknown variant '" + s + "' (expected vanilla, wgan_clip or wgan_gp)");
}

GanConfig GanConfig::defaults(Variant variant, std::size_t output_width) {
  GanConfig c;
  c.variant = variant;
  c.output_width = output_width;
  switch (variant) {
    case Variant::kVanilla:
      c.critic_steps = 1;
      c.critic_optimizer = {OptimizerKind::kAdam, 1e-4, 0.5, 0.9, 1e-8};
      break;
    case Variant::kWganClip:
      c.critic_steps = 5;
      c.clip_value = 0.01;
      c.critic_optimizer = {OptimizerKind::kRmsProp, 5e-5, 0.0, 0.99, 1e-8};
      break;
    case Variant::kWganGp:
      c.critic_steps = 5;
      c.penalty_weight = 10.0;
      c.critic_optimizer = {OptimizerKind::kAdam, 1e-4, 0.0, 0.9, 1e-8};
      break;
  }
  c.generator_optimizer = c.critic_optimizer;
  return c;
}

void GanConfig::validate() const {
  if (noise_dim < 1) throw ConfigError("noise_dim must be >= 1");
  if (output_width < 1) throw ConfigError("output width must be >= 1");
  if (generator_hidden.size() != 3 || critic_hidden.size() != 3) {
    throw ConfigError("generator and critic need exactly 3 hidden layers");
  }
  for (std::size_t h : generator_hidden) {
    if (h == 0) throw ConfigError("hidden layer width must be >= 1");
  }
  for (std::size_t h : critic_hidden) {
    if (h == 0) throw ConfigError("hidden layer width must be >= 1");
  }
  if (critic_steps < 1) throw ConfigError("critic_steps must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (variant == Variant::kWganClip && !(clip_value > 0.0)) {
    throw ConfigError("clip value must be positive");
  }
  if (variant == Variant::kWganGp && !(penalty_weight >= 0.0)) {
    throw ConfigError("penalty weight must be non-negative");
  }
  generator_optimizer.validate();
  critic_optimizer.validate();
}

MlpSpec GanConfig::generator_spec() const {
  MlpSpec s;
  s.sizes = {noise_dim};
  s.sizes.insert(s.sizes.end(), generator_hidden.begin(), generator_hidden.end());
  s.sizes.push_back(output_width);
  s.activations.assign(generator_hidden.size(), Activation::kRelu);
  s.activations.push_back(Activation::kSigmoid);
  return s;
}

MlpSpec GanConfig::critic_spec() const {
  MlpSpec s;
  s.sizes = {output_width};
  s.sizes.insert(s.sizes.end(), critic_hidden.begin(), critic_hidden.end());
  s.sizes.push_back(1);
  s.activations.assign(critic_hidden.size(), Activation::kRelu);
  s.activations.push_back(variant == Variant::kVanilla ? Activation::kSigmoid
                                                       : Activation::kIdentity);
  return s;
}

namespace {

nlohmann::json to_json(const OptimizerConfig& o) {
  return {{"kind", to_string(o.kind)},
          {"learning_rate", o.learning_rate},
          {"beta1", o.beta1},
          {"beta2", o.beta2},
          {"epsilon", o.epsilon}};
}

OptimizerConfig optimizer_from_json(const nlohmann::json& j) {
  OptimizerConfig o;
  o.kind = optimizer_kind_from_string(j.at("kind").get<std::string>());
  o.learning_rate = j.at("learning_rate").get<double>();
  o.beta1 = j.at("beta1").get<double>();
  o.beta2 = j.at("beta2").get<double>();
  o.epsilon = j.at("epsilon").get<double>();
  return o;
}

}  // namespace

nlohmann::json to_json(const GanConfig& c) {
  return {{"noise_dim", c.noise_dim},
          {"generator_hidden", c.generator_hidden},
          {"critic_hidden", c.critic_hidden},
          {"output_width", c.output_width},
          {"variant", to_string(c.variant)},
          {"critic_steps", c.critic_steps},
          {"batch_size", c.batch_size},
          {"clip_value", c.clip_value},
          {"penalty_weight", c.penalty_weight},
          {"generator_optimizer", to_json(c.generator_optimizer)},
          {"critic_optimizer", to_json(c.critic_optimizer)}};
}

GanConfig gan_config_from_json(const nlohmann::json& j) {
  try {
    GanConfig c;
    c.noise_dim = j.at("noise_dim").get<std::size_t>();
    c.generator_hidden = j.at("generator_hidden").get<std::vector<std::size_t>>();
    c.critic_hidden = j.at("critic_hidden").get<std::vector<std::size_t>>();
    c.output_width = j.at("output_width").get<std::size_t>();
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.critic_steps = j.at("critic_steps").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.clip_value = j.at("clip_value").get<double>();
    c.penalty_weight = j.at("penalty_weight").get<double>();
    c.generator_optimizer = optimizer_from_json(j.at("generator_optimizer"));
    c.critic_optimizer = optimizer_from_json(j.at("critic_optimizer"));
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("GAN config: ") + e.what());
  }
}

GanState init_gan(const GanConfig& config, std::uint64_t seed) {
  config.validate();
  GanState s;
  s.config = config;
  Rng init = make_rng(seed, "init");
  s.generator = init_mlp(config.generator_spec(), init);
  s.critic = init_mlp(config.critic_spec(), init);
  s.generator_optimizer = Optimizer(config.generator_optimizer, s.generator);
  s.critic_optimizer = Optimizer(config.critic_optimizer, s.critic);
  s.batch_rng = make_rng(seed, "batching");
  s.noise_rng = make_rng(seed, "noise");
  s.privacy_rng = make_rng(seed, "dp-noise");
  return s;
}

Tensor sample_noise(std::size_t rows, std::size_t dim, Rng& rng) {
  Tensor z(rows, dim);
  for (double& v : z.values()) v = uniform(rng, -1.0, 1.0);
  return z;
}

Tensor generate(const GanState& state, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("generate: need at least one row");
  Rng rng(seed);
  const Tensor z = sample_noise(n, state.config.noise_dim, rng);
  Tensor out = predict_mlp(state.generator, z, generator_activations(state.config));
  // A saturated sigmoid rounds to 0 or 1; keep samples in the open interval.
  constexpr double kLo = 0x1.0p-1022;
  const double hi = std::nextafter(1.0, 0.0);
  for (double& v : out.values()) v = std::clamp(v, kLo, hi);
  return out;
}

Tensor critic_scores(const GanState& state, const Tensor& x) {
  return predict_mlp(state.critic, x, critic_activations(state.config));
}

LossPair vanilla_losses(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.empty() || d_fake.empty()) throw ContractError("vanilla_losses: empty batch");
  auto guard = [](double d) {
    if (!(d > 0.0 && d < 1.0)) {
      throw NumericError("discriminator output " + std::to_string(d) + " outside (0, 1)");
    }
  };
  double real_term = 0.0;
  for (double d : d_real) {
    guard(d);
    real_term += std::log(d);
  }
  double fake_term = 0.0;
  double gen_term = 0.0;
  for (double d : d_fake) {
    guard(d);
    fake_term += std::log1p(-d);
    gen_term += std::log(d);
  }
  const auto nr = static_cast<double>(d_real.size());
  const auto nf = static_cast<double>(d_fake.size());
  return {-real_term / nr - fake_term / nf, -gen_term / nf};
}

LossPair wgan_losses(std::span<const double> f_real, std::span<const double> f_fake) {
  if (f_real.empty() || f_fake.empty()) throw ContractError("wgan_losses: empty batch");
  const double mr = std::accumulate(f_real.begin(), f_real.end(), 0.0) / f_real.size();
  const double mf = std::accumulate(f_fake.begin(), f_fake.end(), 0.0) / f_fake.size();
  return {mf - mr, -mf};
}

void clip_weights(ParamSet& params, double c) {
  if (!(c > 0.0)) throw ContractError("clip value must be positive");
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double& v : params.values(i)) v = std::clamp(v, -c, c);
  }
}

Tensor interpolation_weights(std::size_t rows, Rng& rng) {
  Tensor u(rows, 1);
  for (double& v : u.values()) v = uniform01(rng);
  return u;
}

ad::Var gradient_penalty(ad::Tape& tape, std::span<const ad::Var> critic,
                         std::span<const Activation> activations, const Tensor& real,
                         const Tensor& fake, const Tensor& mix, double weight) {
  if (!real.same_shape(fake)) {
    throw DimensionError("gradient_penalty: real " + real.shape_string() + " vs fake " +
                         fake.shape_string());
  }
  if (mix.rows() != real.rows() || mix.cols() != 1) {
    throw DimensionError("gradient_penalty: interpolation weights must be rows x 1");
  }
  Tensor hat(real.rows(), real.cols());
  for (std::size_t r = 0; r < real.rows(); ++r) {
    const double u = mix[r];
    for (std::size_t c = 0; c < real.cols(); ++c) {
      hat(r, c) = u * real(r, c) + (1.0 - u) * fake(r, c);
    }
  }
  const ad::Var x = tape.leaf(std::move(hat));
  const ad::Var scores = forward_mlp(critic, x, activations);
  // Rows are independent, so the gradient of the sum gives each row's
  // input gradient.
  const ad::Var wrt[] = {x};
  const ad::Var dx = tape.gradients(ad::sum(scores), wrt)[0];
  const ad::Var gap = ad::add_scalar(ad::row_norms(dx), -1.0);
  return ad::scale(ad::mean(ad::square(gap)), weight);
}

double gradient_penalty(const ParamSet& critic, std::span<const Activation> activations,
                        const Tensor& real, const Tensor& fake, double weight,
                        std::uint64_t seed) {
  Rng rng(seed);
  const Tensor mix = interpolation_weights(real.rows(), rng);
  ad::Tape tape;
  const auto bound = bind(tape, critic);
  return gradient_penalty(tape, bound, activations, real, fake, mix, weight).value().item();
}

ad::Var critic_objective(ad::Tape& tape, std::span<const ad::Var> critic,
                         const GanConfig& config, const Tensor& real, const Tensor& fake,
                         const Tensor& mix) {
  const std::vector<Activation> acts = critic_activations(config);
  const ad::Var x_real = tape.leaf(real);
  const ad::Var x_fake = tape.leaf(fake);
  if (config.variant == Variant::kVanilla) {
    // -log D(x) = softplus(-l), -log(1 - D(x)) = softplus(l).
    const ad::Var l_real = forward_mlp_logits(critic, x_real, acts);
    const ad::Var l_fake = forward_mlp_logits(critic, x_fake, acts);
    return ad::add(mean_softplus(l_real, -1.0), mean_softplus(l_fake, 1.0));
  }
  const ad::Var f_real = forward_mlp(critic, x_real, acts);
  const ad::Var f_fake = forward_mlp(critic, x_fake, acts);
  ad::Var loss = ad::sub(ad::mean(f_fake), ad::mean(f_real));
  if (config.variant == Variant::kWganGp) {
    loss = ad::add(loss,
                   gradient_penalty(tape, critic, acts, real, fake, mix, config.penalty_weight));
  }
  return loss;
}

double EpochSummary::mean_critic_loss() const {
  if (critic_losses.empty()) return 0.0;
  return std::accumulate(critic_losses.begin(), critic_losses.end(), 0.0) / critic_losses.size();
}

double EpochSummary::mean_generator_loss() const {
  if (generator_losses.empty()) return 0.0;
  return std::accumulate(generator_losses.begin(), generator_losses.end(), 0.0) /
         generator_losses.size();
}

namespace {

// Examples per parallel block in the DP path; bounds gradient memory.
constexpr std::size_t kDpBlock = 32;

// Reference path: one tape and one backward pass per example.
ParamSet per_example_clipped_sum(const GanState& state, const Tensor& real, const Tensor& fake,
                                 const Tensor& mix, double clip, std::vector<double>& losses) {
  const std::size_t n = real.rows();
  ParamSet sum = state.critic.zeros_like();
  std::vector<ParamSet> grads(std::min(kDpBlock, n));
  for (std::size_t start = 0; start < n; start += kDpBlock) {
    const auto count = static_cast<std::int64_t>(std::min(kDpBlock, n - start));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < count; ++k) {
      try {
        const std::size_t i = start + static_cast<std::size_t>(k);
        ad::Tape tape;
        const auto bound = bind(tape, state.critic);
        const Tensor u = mix.size() ? slice_row(mix, i) : Tensor();
        const ad::Var loss = critic_objective(tape, bound, state.config, slice_row(real, i),
                                              slice_row(fake, i), u);
        losses[i] = loss.value().item();
        grads[k] = grad(tape, loss, state.critic, bound);
        clip_per_example(grads[k], clip);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::int64_t k = 0; k < count; ++k) accumulate(sum, grads[k]);
  }
  return sum;
}

double private_critic_update(GanState& state, const Tensor& real, const Tensor& fake,
                             const Tensor& mix, DpTraining& dp) {
  const std::size_t n = real.rows();
  const double clip = dp.config.clip_norm;
  ParamSet sum;
  double loss_value = 0.0;
  if (dp.per_example_tapes) {
    std::vector<double> losses(n);
    sum = per_example_clipped_sum(state, real, fake, mix, clip, losses);
    loss_value = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
  } else {
    ad::Tape tape;
    const auto bound = bind(tape, state.critic);
    const ad::Var loss = critic_objective(tape, bound, state.config, real, fake, mix);
    loss_value = loss.value().item();
    sum = clipped_gradient_sum(tape, loss, state.critic, bound, static_cast<double>(n), clip);
  }
  noise_and_average(sum, n, clip, dp.config.noise_multiplier, state.privacy_rng);
  dp_adam_step(state.critic_optimizer, state.critic, sum);
  return loss_value;
}

}  // namespace

double critic_step(GanState& state, const Tensor& real, DpTraining* dp, double sample_rate) {
  const GanConfig& cfg = state.config;
  const std::size_t n = real.rows();
  const Tensor z = sample_noise(n, cfg.noise_dim, state.noise_rng);
  const Tensor fake = predict_mlp(state.generator, z, generator_activations(cfg));
  const Tensor mix =
      cfg.variant == Variant::kWganGp ? interpolation_weights(n, state.noise_rng) : Tensor();

  double loss_value = 0.0;
  if (dp == nullptr) {
    ad::Tape tape;
    const auto bound = bind(tape, state.critic);
    const ad::Var loss = critic_objective(tape, bound, cfg, real, fake, mix);
    loss_value = loss.value().item();
    check_finite(loss_value, "critic", state.critic_updates, cfg.variant);
    const ParamSet g = grad(tape, loss, state.critic, bound);
    state.critic_optimizer.step(state.critic, g);
  } else {
    loss_value = private_critic_update(state, real, fake, mix, *dp);
    check_finite(loss_value, "critic", state.critic_updates, cfg.variant);
  }
  if (cfg.variant == Variant::kWganClip) clip_weights(state.critic, cfg.clip_value);
  ++state.critic_updates;

  if (dp != nullptr) {
    const double sigma = dp->config.noise_multiplier;
    if (sigma > 0.0) dp->accountant.add_steps(sample_rate, sigma);
    const double eps = sigma > 0.0 ? dp->accountant.epsilon(dp->config.delta)
                                   : std::numeric_limits<double>::infinity();
    if (dp->on_step) {
      dp->on_step({state.critic_updates, state.epoch + 1, sigma, sample_rate,
                   dp->config.clip_norm, eps});
    }
    if (eps > dp->config.target_epsilon) dp->exhausted = true;
  }
  return loss_value;
}

double generator_step(GanState& state, std::size_t batch_size) {
  const GanConfig& cfg = state.config;
  ad::Tape tape;
  const auto gen = bind(tape, state.generator);
  const auto critic = bind(tape, state.critic);
  const ad::Var z = tape.leaf(sample_noise(batch_size, cfg.noise_dim, state.noise_rng));
  const ad::Var fake = forward_mlp(gen, z, generator_activations(cfg));
  const std::vector<Activation> acts = critic_activations(cfg);
  ad::Var loss;
  if (cfg.variant == Variant::kVanilla) {
    loss = mean_softplus(forward_mlp_logits(critic, fake, acts), -1.0);
  } else {
    loss = ad::scale(ad::mean(forward_mlp(critic, fake, acts)), -1.0);
  }
  const double value = loss.value().item();
  check_finite(value, "generator", state.generator_updates, cfg.variant);
  const ParamSet g = grad(tape, loss, state.generator, gen);
  state.generator_optimizer.step(state.generator, g);
  ++state.generator_updates;
  return value;
}

EpochSummary train_epoch(GanState& state, const Tensor& data, DpTraining* dp) {
  const GanConfig& cfg = state.config;
  if (data.rows() == 0) throw ContractError("train_epoch: empty training data");
  if (data.cols() != cfg.output_width) {
    throw DimensionError("train_epoch: data width " + std::to_string(data.cols()) +
                         " vs generator output " + std::to_string(cfg.output_width));
  }
  if (dp != nullptr) dp->config.validate();
  const std::size_t n = data.rows();
  const std::size_t batch = std::min(cfg.batch_size, n);
  const std::size_t batches = n / batch;
  const double sample_rate = static_cast<double>(batch) / static_cast<double>(n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_index(state.batch_rng, i + 1)]);
  }

  EpochSummary summary;
  for (std::size_t b = 0; b < batches; ++b) {
    if (dp != nullptr && dp->exhausted) break;
    const Tensor real = gather_rows(data, std::span(order).subspan(b * batch, batch));
    summary.critic_losses.push_back(critic_step(state, real, dp, sample_rate));
    ++summary.critic_steps;
    if (dp != nullptr && dp->exhausted) break;
    if (state.critic_updates % cfg.critic_steps == 0) {
      summary.generator_losses.push_back(generator_step(state, batch));
      ++summary.generator_steps;
    }
  }
  ++state.epoch;
  summary.epoch = state.epoch;
  summary.budget_exhausted = dp != nullptr && dp->exhausted;
  return summary;
}

}  // namespace ehrgan
