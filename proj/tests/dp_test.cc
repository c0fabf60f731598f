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

#include "ehrgan/dp.h"
#include "ehrgan/errors.h"
#include "ehrgan/gan.h"
#include "ehrgan/optimizer.h"
#include "oracles.h"

namespace ehrgan {
namespace {

ParamSet random_params(Rng& rng, double scale) {
  ParamSet p;
  p.add("a", oracle::random_tensor(10, 20, rng, -scale, scale));
  p.add("b", oracle::random_tensor(1, 20, rng, -scale, scale));
  p.add("c", oracle::random_tensor(20, 39, rng, -scale, scale));
  return p;
}

TEST(Clip, LargeGradientScaledToExactlyC) {
  ParamSet g;
  g.add("w", Tensor::Row({6, 8}));
  const double before = clip_per_example(g, 1.0);
  EXPECT_EQ(before, 10.0);
  EXPECT_NEAR(global_norm(g), 1.0, 1e-15);
  EXPECT_NEAR(g[0][0] / g[0][1], 0.75, 1e-15);
}

TEST(Clip, SmallGradientUnchanged) {
  ParamSet g;
  g.add("w", Tensor::Row({0.3, 0.4}));
  const ParamSet before = g;
  clip_per_example(g, 1.0);
  EXPECT_EQ(g, before);
  ParamSet zero;
  zero.add("w", Tensor(2, 2));
  clip_per_example(zero, 1.0);
  EXPECT_EQ(zero[0], Tensor(2, 2));
}

TEST(Clip, NormIsMinOfNormAndC) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    ParamSet g;
    g.add("v", oracle::random_tensor(1, 1000, rng, -0.1, 0.1));
    const double n0 = global_norm(g);
    clip_per_example(g, 0.7);
    EXPECT_NEAR(global_norm(g), std::min(n0, 0.7), 1e-12);
  }
}

TEST(Clip, UnboundedNeverScales) {
  Rng rng(2);
  ParamSet g = random_params(rng, 100.0);
  const ParamSet before = g;
  clip_per_example(g, kNoClipping);
  EXPECT_EQ(g, before);
}

TEST(NoisyMean, ZeroNoiseIsExactMean) {
  Rng rng(3);
  std::vector<ParamSet> gs;
  for (int i = 0; i < 4; ++i) gs.push_back(random_params(rng, 1.0));
  const ParamSet m = noisy_mean(gs, 1.0, 0.0, rng);
  for (std::size_t t = 0; t < m.size(); ++t)
    for (std::size_t j = 0; j < m[t].size(); ++j) {
      const double expect = (gs[0][t][j] + gs[1][t][j] + gs[2][t][j] + gs[3][t][j]) / 4.0;
      EXPECT_NEAR(m[t][j], expect, 1e-15);
    }
  const std::vector<ParamSet> one = {gs[0]};
  EXPECT_EQ(noisy_mean(one, 100.0, 0.0, rng), gs[0]);
}

TEST(NoisyMean, NoiseStandardDeviationMatches) {
  const double sigma = 1.3, clip = 0.7;
  const std::size_t batch = 8;
  ParamSet sum;
  sum.add("w", Tensor::Row({2.0, -1.0, 0.5}));
  Rng rng(4);
  const int reps = 100000;
  std::vector<double> s(3, 0.0), s2(3, 0.0);
  for (int r = 0; r < reps; ++r) {
    ParamSet x = sum;
    noise_and_average(x, batch, clip, sigma, rng);
    for (int j = 0; j < 3; ++j) {
      const double d = x[0][j] - sum[0][j] / batch;
      s[j] += d;
      s2[j] += d * d;
    }
  }
  const double expect = sigma * clip / batch;
  for (int j = 0; j < 3; ++j) {
    const double mean = s[j] / reps;
    const double sd = std::sqrt(s2[j] / reps - mean * mean);
    EXPECT_NEAR(sd / expect, 1.0, 0.02);
    EXPECT_NEAR(mean, 0.0, 4 * expect / std::sqrt(reps));
  }
}

TEST(Adam, FirstStepIsLearningRate) {
  ParamSet p;
  p.add("x", Tensor::Scalar(0.0));
  ParamSet g;
  g.add("x", Tensor::Scalar(1.0));
  Optimizer adam({OptimizerKind::kAdam, 0.1, 0.9, 0.999, 1e-8}, p);
  dp_adam_step(adam, p, g);
  EXPECT_NEAR(p[0].item(), -0.1, 1e-9);
}

TEST(Adam, TwoStepsMatchHandRecurrence) {
  const double lr = 0.05, b1 = 0.9, b2 = 0.99, eps = 1e-8;
  ParamSet p;
  p.add("x", Tensor::Scalar(1.0));
  Optimizer adam({OptimizerKind::kAdam, lr, b1, b2, eps}, p);
  ParamSet g;
  g.add("x", Tensor::Scalar(2.0));
  dp_adam_step(adam, p, g);
  g = ParamSet();
  g.add("x", Tensor::Scalar(-1.0));
  dp_adam_step(adam, p, g);
  // m1 = 0.2, v1 = 0.04; m2 = 0.18 - 0.1 = 0.08, v2 = 0.0396 + 0.01 = 0.0496.
  double x = 1.0;
  x -= lr * (0.2 / (1 - b1)) / (std::sqrt(0.04 / (1 - b2)) + eps);
  x -= lr * (0.08 / (1 - b1 * b1)) / (std::sqrt(0.0496 / (1 - b2 * b2)) + eps);
  EXPECT_NEAR(p[0].item(), x, 1e-12);
}

TEST(Adam, ZeroGradientIsFixedPoint) {
  Rng rng(5);
  ParamSet p = random_params(rng, 1.0);
  const ParamSet start = p;
  Optimizer adam({OptimizerKind::kAdam, 0.1, 0.5, 0.9, 1e-8}, p);
  for (int i = 0; i < 5; ++i) dp_adam_step(adam, p, p.zeros_like());
  EXPECT_EQ(p, start);
}

TEST(RmsProp, HandStep) {
  ParamSet p;
  p.add("x", Tensor::Scalar(0.0));
  ParamSet g;
  g.add("x", Tensor::Scalar(3.0));
  Optimizer rms({OptimizerKind::kRmsProp, 0.01, 0.0, 0.99, 1e-8}, p);
  rms.step(p, g);
  EXPECT_NEAR(p[0].item(), -0.01 * 3.0 / (std::sqrt(0.01 * 9.0) + 1e-8), 1e-15);
}

TEST(DpConfig, Validation) {
  DpConfig c;
  EXPECT_NO_THROW(c.validate());
  c.clip_norm = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = DpConfig{};
  c.noise_multiplier = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = DpConfig{};
  c.clip_norm = kNoClipping;
  EXPECT_THROW(c.validate(), ConfigError);
  c.noise_multiplier = 0.0;
  EXPECT_NO_THROW(c.validate());
  c = DpConfig{};
  c.delta = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

GanConfig small_gp(std::size_t width) {
  GanConfig c = GanConfig::defaults(Variant::kWganGp, width);
  c.noise_dim = 6;
  c.generator_hidden = {10, 9, 8};
  c.critic_hidden = {12, 10, 8};
  c.batch_size = 8;
  return c;
}

TEST(PrivateCritic, FactoredMatchesPerExampleTapes) {
  Rng rng(6);
  const Tensor data = oracle::random_tensor(64, 7, rng, 0, 1);
  for (double clip : {0.05, 1.0, kNoClipping}) {
    GanState a = init_gan(small_gp(7), 3);
    GanState b = init_gan(small_gp(7), 3);
    DpTraining da{.config = {clip, clip == kNoClipping ? 0.0 : 0.8, 1e9, 1e-5}};
    DpTraining db = da;
    db.per_example_tapes = true;
    train_epoch(a, data, &da);
    train_epoch(b, data, &db);
    for (std::size_t p = 0; p < a.critic.size(); ++p)
      for (std::size_t j = 0; j < a.critic[p].size(); ++j)
        EXPECT_NEAR(a.critic[p][j], b.critic[p][j], 1e-9) << "clip " << clip;
    EXPECT_EQ(da.accountant.rdp()[5], db.accountant.rdp()[5]);
  }
}

TEST(PrivateCritic, PerExampleNormsAreExact) {
  Rng rng(7);
  GanState s = init_gan(small_gp(5), 2);
  const Tensor real = oracle::random_tensor(6, 5, rng, 0, 1);
  const Tensor fake = oracle::random_tensor(6, 5, rng, 0, 1);
  const Tensor mix = oracle::random_tensor(6, 1, rng, 0, 1);
  ad::Tape tape;
  const auto bound = bind(tape, s.critic);
  const ad::Var loss = critic_objective(tape, bound, s.config, real, fake, mix);
  std::vector<double> norms;
  clipped_gradient_sum(tape, loss, s.critic, bound, 6.0, kNoClipping, &norms);
  ASSERT_EQ(norms.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    auto row = [&](const Tensor& t) {
      Tensor r(1, t.cols());
      for (std::size_t j = 0; j < t.cols(); ++j) r[j] = t(i, j);
      return r;
    };
    ad::Tape one;
    const auto b1 = bind(one, s.critic);
    const ad::Var l1 = critic_objective(one, b1, s.config, row(real), row(fake), row(mix));
    EXPECT_NEAR(norms[i], global_norm(grad(one, l1, s.critic, b1)), 1e-10 * std::max(1.0, norms[i]));
  }
}

TEST(PrivateCritic, DegeneratesToPlainAdamBitExactly) {
  Rng rng(8);
  const Tensor data = oracle::random_tensor(64, 6, rng, 0, 1);
  for (std::size_t batch : {1u, 4u, 8u}) {
    GanConfig c = small_gp(6);
    c.batch_size = batch;
    GanState plain = init_gan(c, 5);
    GanState priv = init_gan(c, 5);
    DpTraining dp{.config = {kNoClipping, 0.0, std::numeric_limits<double>::infinity(), 1e-5}};
    for (int e = 0; e < 2; ++e) {
      train_epoch(plain, data);
      train_epoch(priv, data, &dp);
    }
    EXPECT_TRUE(plain.critic == priv.critic) << "batch " << batch;
    EXPECT_TRUE(plain.generator == priv.generator) << "batch " << batch;
    EXPECT_FALSE(dp.exhausted);
  }
}

TEST(PrivateCritic, GeneratorStepsSpendNoBudget) {
  Rng rng(9);
  const Tensor data = oracle::random_tensor(80, 6, rng, 0, 1);
  GanState s = init_gan(small_gp(6), 5);
  DpTraining dp{.config = {1.0, 1.0, 1e9, 1e-5}};
  std::size_t rows = 0;
  dp.on_step = [&](const PrivacyLogRow&) { ++rows; };
  const EpochSummary e = train_epoch(s, data, &dp);
  EXPECT_EQ(dp.accountant.steps(), e.critic_steps);
  EXPECT_EQ(rows, e.critic_steps);
  EXPECT_GT(e.generator_steps, 0u);
}

TEST(PrivateCritic, StopsAtTheCrossingStep) {
  Rng rng(10);
  const Tensor data = oracle::random_tensor(80, 6, rng, 0, 1);
  const double target = compute_epsilon(0.1, 1.0, 13, 1e-5) * 0.999;
  auto run = [&] {
    GanState s = init_gan(small_gp(6), 5);
    DpTraining dp{.config = {1.0, 1.0, target, 1e-5}};
    std::vector<PrivacyLogRow> log;
    dp.on_step = [&](const PrivacyLogRow& r) { log.push_back(r); };
    std::size_t steps = 0;
    for (int e = 0; e < 5 && !dp.exhausted; ++e) steps += train_epoch(s, data, &dp).critic_steps;
    EXPECT_EQ(steps, log.size());
    return std::pair{log, s};
  };
  const auto [log, state] = run();
  ASSERT_EQ(log.size(), 13u);
  for (std::size_t i = 0; i + 1 < log.size(); ++i) EXPECT_LE(log[i].epsilon, target);
  EXPECT_GT(log.back().epsilon, target);
  EXPECT_EQ(state.critic_updates, 13u);
  const auto [log2, state2] = run();
  EXPECT_EQ(log2.size(), log.size());
  EXPECT_TRUE(state2 == state);
}

}  // namespace
}  // namespace ehrgan
