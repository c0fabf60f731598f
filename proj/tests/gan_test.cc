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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ehrgan/checkpoint.h"
#include "ehrgan/errors.h"
#include "ehrgan/gan.h"
#include "ehrgan/kernels.h"
#include "ehrgan/metrics.h"
#include "oracles.h"

namespace ehrgan {
namespace {

GanConfig small_config(Variant v, std::size_t width) {
  GanConfig c = GanConfig::defaults(v, width);
  c.noise_dim = 8;
  c.generator_hidden = {16, 16, 16};
  c.critic_hidden = {16, 16, 16};
  c.batch_size = 16;
  return c;
}

TEST(GanConfig, DefaultsPerVariant) {
  const GanConfig gp = GanConfig::defaults(Variant::kWganGp, 10);
  EXPECT_EQ(gp.critic_steps, 5u);
  EXPECT_EQ(gp.penalty_weight, 10.0);
  EXPECT_EQ(gp.critic_optimizer.kind, OptimizerKind::kAdam);
  EXPECT_EQ(gp.critic_optimizer.learning_rate, 1e-4);
  EXPECT_EQ(gp.critic_optimizer.beta1, 0.0);
  EXPECT_EQ(gp.critic_optimizer.beta2, 0.9);
  const GanConfig clip = GanConfig::defaults(Variant::kWganClip, 10);
  EXPECT_EQ(clip.critic_optimizer.kind, OptimizerKind::kRmsProp);
  EXPECT_EQ(clip.critic_optimizer.learning_rate, 5e-5);
  EXPECT_EQ(clip.clip_value, 0.01);
  const GanConfig van = GanConfig::defaults(Variant::kVanilla, 10);
  EXPECT_EQ(van.critic_steps, 1u);
  EXPECT_EQ(van.critic_optimizer.beta1, 0.5);
  EXPECT_EQ(gp.noise_dim, 100u);
  EXPECT_EQ(gp.generator_hidden, (std::vector<std::size_t>{128, 256, 512}));
  EXPECT_EQ(gp.critic_hidden, (std::vector<std::size_t>{512, 256, 128}));
  EXPECT_EQ(gp.batch_size, 256u);
}

TEST(GanConfig, JsonRoundTripAndValidation) {
  for (Variant v : {Variant::kVanilla, Variant::kWganClip, Variant::kWganGp}) {
    const GanConfig c = GanConfig::defaults(v, 7);
    EXPECT_EQ(gan_config_from_json(to_json(c)), c);
  }
  GanConfig bad = GanConfig::defaults(Variant::kWganGp, 7);
  bad.critic_hidden = {4, 4};
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(variant_from_string("dcgan"), ConfigError);
}

TEST(Generate, ShapeRangeAndDeterminism) {
  const GanState s = init_gan(small_config(Variant::kWganGp, 6), 1);
  const Tensor a = generate(s, 4, 9);
  EXPECT_EQ(a.rows(), 4u);
  EXPECT_EQ(a.cols(), 6u);
  for (double v : a.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(generate(s, 4, 9), a);
  EXPECT_NE(generate(s, 4, 10), a);
  EXPECT_THROW(generate(s, 0, 1), ConfigError);
}

TEST(Generate, ZeroGeneratorGivesOneHalf) {
  GanState s = init_gan(small_config(Variant::kWganGp, 5), 1);
  for (std::size_t i = 0; i < s.generator.size(); ++i)
    for (double& v : s.generator.values(i)) v = 0.0;
  const Tensor out = generate(s, 3, 2);
  for (double v : out.values()) EXPECT_EQ(v, 0.5);
}

TEST(Losses, VanillaClosedForms) {
  const std::vector<double> half(8, 0.5);
  const LossPair l = vanilla_losses(half, half);
  EXPECT_NEAR(l.critic, 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(l.generator, std::log(2.0), 1e-15);
  const std::vector<double> real(4, 0.99), fake(4, 0.01);
  EXPECT_NEAR(vanilla_losses(real, fake).critic, -2.0 * std::log(0.99), 1e-15);
  EXPECT_NEAR(vanilla_losses(real, fake).critic, 0.0201, 1e-4);
  const std::vector<double> bad = {0.5, 1.0};
  EXPECT_THROW(vanilla_losses(bad, half), NumericError);
}

TEST(Losses, WassersteinClosedForms) {
  const std::vector<double> c(5, 2.5);
  EXPECT_EQ(wgan_losses(c, c).critic, 0.0);
  const std::vector<double> real = {2.0, 4.0, 3.0}, fake = {1.0, 0.0, 2.0};
  EXPECT_EQ(wgan_losses(real, fake).critic, -2.0);
  EXPECT_EQ(wgan_losses(real, fake).generator, -1.0);
}

TEST(ClipWeights, ClampsOutsideOnly) {
  ParamSet p;
  p.add("w", Tensor::Row({0.5, -0.005, -3.0, 0.01}));
  clip_weights(p, 0.01);
  EXPECT_EQ(p[0], Tensor::Row({0.01, -0.005, -0.01, 0.01}));
  Rng rng(3);
  ParamSet q;
  q.add("a", oracle::random_tensor(10, 10, rng));
  q.add("b", oracle::random_tensor(1, 10, rng, -0.001, 0.001));
  const ParamSet before = q;
  clip_weights(q, 0.01);
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (double v : q.values(i)) worst = std::max(worst, std::abs(v));
  EXPECT_EQ(worst, 0.01);
  EXPECT_EQ(q[1], before[1]);
  EXPECT_THROW(clip_weights(q, 0.0), ContractError);
}

ParamSet linear_critic(std::vector<double> w) {
  ParamSet p;
  Tensor wt(w.size(), 1);
  for (std::size_t i = 0; i < w.size(); ++i) wt[i] = w[i];
  p.add("W0", wt);
  p.add("b0", Tensor(1, 1));
  return p;
}

TEST(GradientPenalty, LinearCriticClosedForms) {
  const Activation acts[] = {Activation::kIdentity};
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor real = oracle::random_tensor(8, 3, rng);
    const Tensor fake = oracle::random_tensor(8, 3, rng);
    EXPECT_EQ(gradient_penalty(linear_critic({1, 0, 0}), acts, real, fake, 10.0, trial), 0.0);
    EXPECT_NEAR(gradient_penalty(linear_critic({0.6, 0.8, 0}), acts, real, fake, 10.0, trial), 0.0,
                1e-13);
    EXPECT_NEAR(gradient_penalty(linear_critic({1, 2, 2}), acts, real, fake, 10.0, trial), 40.0,
                1e-9);
  }
}

TEST(GradientPenalty, WeightGradientMatchesFiniteDifferences) {
  const Activation acts[] = {Activation::kIdentity};
  Rng rng(2);
  const Tensor real = oracle::random_tensor(5, 3, rng);
  const Tensor fake = oracle::random_tensor(5, 3, rng);
  const Tensor mix = oracle::random_tensor(5, 1, rng, 0, 1);
  const std::vector<Tensor> inputs = {Tensor::FromRows({{1.5}, {-0.7}, {2.0}}), Tensor::Scalar(0.3)};
  const auto fn = [&](ad::Tape& tape, const std::vector<ad::Var>& p) {
    return gradient_penalty(tape, p, acts, real, fake, mix, 10.0);
  };
  EXPECT_LE(oracle::check_gradients(fn, inputs, 1e-6).max_error, 1e-4);
}

TEST(GradientPenalty, ShapeMismatchThrows) {
  const Activation acts[] = {Activation::kIdentity};
  EXPECT_THROW(gradient_penalty(linear_critic({1, 0}), acts, Tensor(3, 2), Tensor(4, 2), 1.0, 1),
               DimensionError);
}

TEST(TrainEpoch, StepBookkeeping) {
  GanConfig v = small_config(Variant::kVanilla, 4);
  v.batch_size = 10;
  GanState s = init_gan(v, 1);
  Rng rng(1);
  const EpochSummary e = train_epoch(s, oracle::random_tensor(10, 4, rng, 0, 1));
  EXPECT_EQ(e.critic_steps, 1u);
  EXPECT_EQ(e.generator_steps, 1u);
  EXPECT_EQ(s.epoch, 1u);

  GanConfig gp = small_config(Variant::kWganGp, 4);
  gp.batch_size = 4;
  GanState g = init_gan(gp, 2);
  const EpochSummary e2 = train_epoch(g, oracle::random_tensor(200, 4, rng, 0, 1));
  EXPECT_EQ(e2.critic_steps, 50u);
  EXPECT_EQ(e2.generator_steps, 10u);
  EXPECT_EQ(e2.critic_losses.size(), 50u);
  EXPECT_EQ(g.critic_updates, 50u);
  EXPECT_EQ(g.generator_updates, 10u);
}

TEST(TrainEpoch, RejectsBadData) {
  GanState s = init_gan(small_config(Variant::kWganGp, 4), 1);
  EXPECT_THROW(train_epoch(s, Tensor(0, 4)), ContractError);
  EXPECT_THROW(train_epoch(s, Tensor(10, 5)), DimensionError);
}

TEST(TrainEpoch, WeightClippingHoldsAfterEveryEpoch) {
  GanState s = init_gan(small_config(Variant::kWganClip, 4), 3);
  Rng rng(3);
  const Tensor data = oracle::random_tensor(64, 4, rng, 0, 1);
  for (int e = 0; e < 3; ++e) {
    train_epoch(s, data);
    for (std::size_t i = 0; i < s.critic.size(); ++i)
      for (double v : s.critic.values(i)) EXPECT_LE(std::abs(v), 0.01);
  }
}

TEST(TrainEpoch, ReproducibleBitForBit) {
  Rng rng(4);
  const Tensor data = oracle::random_tensor(80, 5, rng, 0, 1);
  for (Variant v : {Variant::kVanilla, Variant::kWganClip, Variant::kWganGp}) {
    GanState a = init_gan(small_config(v, 5), 11);
    GanState b = init_gan(small_config(v, 5), 11);
    for (int e = 0; e < 3; ++e) {
      train_epoch(a, data);
      train_epoch(b, data);
    }
    EXPECT_TRUE(a == b) << to_string(v);
  }
}

TEST(TrainEpoch, ThreadCountDoesNotChangeState) {
  Rng rng(4);
  const Tensor data = oracle::random_tensor(256, 12, rng, 0, 1);
  GanConfig c = GanConfig::defaults(Variant::kWganGp, 12);
  c.batch_size = 64;
  GanState a = init_gan(c, 5);
  GanState b = init_gan(c, 5);
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  train_epoch(a, data);
  kernels::set_threads(4);
  train_epoch(b, data);
  kernels::set_threads(saved);
  EXPECT_TRUE(a == b);
}

Tensor toy_data(std::size_t n, Rng& rng) {
  // bernoulli p = 0.8 then a 3-way categorical [0.2, 0.3, 0.5].
  Tensor t(n, 4);
  for (std::size_t r = 0; r < n; ++r) {
    t(r, 0) = uniform01(rng) < 0.8 ? 1.0 : 0.0;
    const double u = uniform01(rng);
    t(r, u < 0.2 ? 1 : u < 0.5 ? 2 : 3) = 1.0;
  }
  return t;
}

Schema toy_schema() {
  Schema s;
  s.features = {FeatureSpec{.name = "b", .is_label = true},
                FeatureSpec{.name = "c", .kind = FeatureKind::kCategorical, .categories = {"x", "y", "z"}}};
  return s;
}

TEST(TrainEpoch, ToyMarginalsAreLearned) {
  Rng rng(6);
  const Tensor data = toy_data(2000, rng);
  GanConfig c = GanConfig::defaults(Variant::kWganGp, 4);
  c.noise_dim = 16;
  c.generator_hidden = {32, 32, 32};
  c.critic_hidden = {32, 32, 32};
  c.batch_size = 50;
  c.generator_optimizer.learning_rate = 1e-3;
  c.critic_optimizer.learning_rate = 1e-3;
  GanState s = init_gan(c, 7);
  for (int e = 0; e < 200; ++e) {
    const EpochSummary sum = train_epoch(s, data);
    ASSERT_TRUE(std::isfinite(sum.mean_critic_loss()));
  }
  const DiscreteMarginals m = discrete_marginals(generate(s, 20000, 1), toy_schema());
  EXPECT_NEAR(m.bernoulli[0], 0.8, 0.05);
  EXPECT_NEAR(m.categorical[0][0], 0.2, 0.05);
  EXPECT_NEAR(m.categorical[0][1], 0.3, 0.05);
  EXPECT_NEAR(m.categorical[0][2], 0.5, 0.05);
}

TEST(Checkpoint, RoundTripRestoresEverything) {
  Rng rng(8);
  const Tensor data = oracle::random_tensor(48, 5, rng, 0, 1);
  for (Variant v : {Variant::kVanilla, Variant::kWganClip, Variant::kWganGp}) {
    GanState s = init_gan(small_config(v, 5), 3);
    train_epoch(s, data);
    std::stringstream buf;
    write_checkpoint(buf, s);
    GanState back = read_checkpoint(buf);
    EXPECT_TRUE(back == s);
    // Resumed training matches uninterrupted training.
    train_epoch(s, data);
    train_epoch(back, data);
    EXPECT_TRUE(back == s);
  }
}

TEST(Checkpoint, CorruptInputIsFormatError) {
  std::stringstream junk("definitely not a checkpoint");
  EXPECT_THROW(read_checkpoint(junk), FormatError);
  GanState s = init_gan(small_config(Variant::kWganGp, 5), 3);
  std::stringstream buf;
  write_checkpoint(buf, s);
  const std::string bytes = buf.str();
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(read_checkpoint(cut), FormatError);
  EXPECT_THROW(load_checkpoint("/nonexistent/x.ckpt"), PathError);
}

}  // namespace
}  // namespace ehrgan
