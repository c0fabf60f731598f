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

#include <algorithm>
#include <cmath>
#include <string>

#include "ehrgan/autodiff.h"
#include "ehrgan/errors.h"
#include "ehrgan/gan.h"
#include "ehrgan/kernels.h"
#include "ehrgan/mlp.h"
#include "ehrgan/param_set.h"
#include "oracles.h"

namespace ehrgan {
namespace {

using oracle::check_gradients;

TEST(Tensor, ShapeAndValues) {
  Tensor t(2, 3, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.shape_string(), "[2, 3]");
  EXPECT_TRUE(t.all_finite());
  t(1, 2) = std::nan("");
  EXPECT_FALSE(t.all_finite());
  EXPECT_THROW(Tensor(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor::FromRows({{1, 2}, {3}}), DimensionError);
}

TEST(Autodiff, SquareAtThreeHasGradientSix) {
  ad::Tape tape;
  const ad::Var w = tape.leaf(Tensor::Scalar(3.0));
  const ad::Var out = ad::square(w);
  const ad::Var wrt[] = {w};
  EXPECT_EQ(tape.gradients(out, wrt)[0].value().item(), 6.0);
}

TEST(Autodiff, SigmoidSlopeAtZeroIsQuarter) {
  ad::Tape tape;
  const ad::Var w = tape.leaf(Tensor::Scalar(0.0));
  const ad::Var wrt[] = {w};
  EXPECT_EQ(tape.gradients(ad::sigmoid(w), wrt)[0].value().item(), 0.25);
}

TEST(Autodiff, ReluSlopeAtZeroIsZero) {
  ad::Tape tape;
  const ad::Var w = tape.leaf(Tensor::Scalar(0.0));
  const ad::Var wrt[] = {w};
  EXPECT_EQ(tape.gradients(ad::relu(w), wrt)[0].value().item(), 0.0);
}

TEST(Autodiff, SumOfSquaresInputGradient) {
  ad::Tape tape;
  const ad::Var x = tape.leaf(Tensor::Row({1, 2}));
  const ad::Var wrt[] = {x};
  const Tensor g = tape.gradients(ad::sum(ad::square(x)), wrt)[0].value();
  EXPECT_EQ(g, Tensor::Row({2, 4}));
}

TEST(Autodiff, LinearCriticInputGradientIsWeightExactly) {
  Rng rng(5);
  const Tensor w = oracle::random_tensor(4, 1, rng);
  ad::Tape tape;
  const ad::Var x = tape.leaf(oracle::random_tensor(1, 4, rng));
  const ad::Var wrt[] = {x};
  const Tensor g = tape.gradients(ad::sum(ad::matmul(x, tape.leaf(w))), wrt)[0].value();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(g[i], w[i]);
}

TEST(Autodiff, NonScalarOutputIsContractError) {
  ad::Tape tape;
  const ad::Var x = tape.leaf(Tensor::Row({1, 2}));
  const ad::Var wrt[] = {x};
  EXPECT_THROW(tape.gradients(x, wrt), ContractError);
}

TEST(Autodiff, InputFromAnotherTapeIsContractError) {
  ad::Tape a, b;
  const ad::Var x = a.leaf(Tensor::Scalar(1.0));
  const ad::Var y = b.leaf(Tensor::Scalar(1.0));
  const ad::Var wrt[] = {y};
  EXPECT_THROW(a.gradients(ad::square(x), wrt), ContractError);
  EXPECT_THROW(ad::add(x, y), ContractError);
}

TEST(Autodiff, ShapeMismatchIsDimensionError) {
  ad::Tape tape;
  const ad::Var a = tape.leaf(Tensor(2, 3));
  const ad::Var b = tape.leaf(Tensor(3, 2));
  EXPECT_THROW(ad::add(a, b), DimensionError);
  EXPECT_THROW(ad::matmul(a, a), DimensionError);
  EXPECT_THROW(ad::add_bias(a, tape.leaf(Tensor(1, 2))), DimensionError);
}

TEST(Autodiff, UnreachableInputsGetExactZeros) {
  ad::Tape tape;
  const ad::Var x = tape.leaf(Tensor::Row({1, 2}));
  const ad::Var unused = tape.leaf(Tensor(2, 3, 7.0));
  const ad::Var wrt[] = {x, unused};
  const auto g = tape.gradients(ad::sum(ad::square(x)), wrt);
  EXPECT_EQ(g[1].value(), Tensor(2, 3));
}

TEST(Autodiff, EveryPrimitiveMatchesFiniteDifferencesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    for (const auto& pc : oracle::primitive_cases(rng)) {
      const auto r = check_gradients(oracle::first_order(pc, seed + 1000), pc.inputs);
      EXPECT_LE(r.max_error, 1e-5) << pc.name << " seed " << seed;
    }
  }
}

TEST(Autodiff, DoubleBackpropMatchesFiniteDifferencesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 77);
    for (const auto& pc : oracle::primitive_cases(rng)) {
      const auto r = check_gradients(oracle::second_order(pc, seed + 2000), pc.inputs);
      EXPECT_LE(r.max_error, 1e-4) << pc.name << " seed " << seed;
    }
  }
}

TEST(Autodiff, BackwardIsLinearInTheOutput) {
  Rng rng(3);
  const Tensor xv = oracle::random_tensor(3, 4, rng);
  const Tensor wv = oracle::random_tensor(4, 2, rng);
  auto grad_of = [&](int which) {
    ad::Tape tape;
    const ad::Var x = tape.leaf(xv);
    const ad::Var w = tape.leaf(wv);
    const ad::Var f = ad::sum(ad::sigmoid(ad::matmul(x, w)));
    const ad::Var g = ad::sum(ad::square(ad::matmul(x, w)));
    const ad::Var out = which == 0 ? f : which == 1 ? g : ad::add(f, g);
    const ad::Var wrt[] = {w};
    return tape.gradients(out, wrt)[0].value();
  };
  const Tensor a = grad_of(0), b = grad_of(1), both = grad_of(2);
  for (std::size_t i = 0; i < both.size(); ++i) EXPECT_NEAR(both[i], a[i] + b[i], 1e-14);
}

TEST(Autodiff, RepeatedEvaluationIsBitIdentical) {
  Rng rng(9);
  const MlpSpec spec{{6, 8, 8, 8, 1}, {Activation::kRelu, Activation::kRelu, Activation::kRelu, Activation::kIdentity}};
  const ParamSet params = init_mlp(spec, rng);
  const Tensor x = oracle::random_tensor(5, 6, rng);
  auto run = [&] {
    ad::Tape tape;
    const auto bound = bind(tape, params);
    return grad(tape, ad::mean(forward_mlp(bound, tape.leaf(x), spec.activations)), params, bound);
  };
  EXPECT_EQ(run(), run());
}

TEST(Autodiff, FactoredGradientsSumToTheGradient) {
  Rng rng(21);
  const MlpSpec spec{{5, 7, 6, 4, 1}, {Activation::kRelu, Activation::kRelu, Activation::kRelu, Activation::kIdentity}};
  const ParamSet params = init_mlp(spec, rng);
  const Tensor real = oracle::random_tensor(6, 5, rng, 0, 1);
  const Tensor fake = oracle::random_tensor(6, 5, rng, 0, 1);
  const Tensor mix = oracle::random_tensor(6, 1, rng, 0, 1);
  GanConfig cfg = GanConfig::defaults(Variant::kWganGp, 5);
  cfg.critic_hidden = {7, 6, 4};
  ad::Tape tape;
  const auto bound = bind(tape, params);
  const ad::Var loss = critic_objective(tape, bound, cfg, real, fake, mix);
  const ParamSet full = grad(tape, loss, params, bound);
  const auto factors = tape.factored_gradients(loss, bound);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor sum(params[p].rows(), params[p].cols());
    for (const auto& [l, r] : factors[p].outer) {
      const Tensor t = kernels::serial::matmul_tn(l.value(), r.value());
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += t[i];
    }
    for (const auto& rows : factors[p].rows) {
      for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t j = 0; j < rows.cols(); ++j) sum[j] += rows.value()(i, j);
    }
    for (std::size_t i = 0; i < sum.size(); ++i) {
      EXPECT_NEAR(sum[i], full[p][i], 1e-12 * std::max(1.0, std::abs(full[p][i]))) << params.name(p);
    }
  }
}

TEST(Autodiff, FactoredGradientsRejectLeftOperandUse) {
  ad::Tape tape;
  const ad::Var w = tape.leaf(Tensor(2, 2, 1.0));
  const ad::Var x = tape.leaf(Tensor(2, 2, 1.0));
  const ad::Var wrt[] = {w};
  EXPECT_THROW(tape.factored_gradients(ad::sum(ad::matmul(w, x)), wrt), ContractError);
}

TEST(Mlp, IdentityLayerPassesInputThrough) {
  ParamSet p;
  p.add("W0", Tensor::FromRows({{1, 0}, {0, 1}}));
  p.add("b0", Tensor(1, 2));
  const Activation acts[] = {Activation::kIdentity};
  EXPECT_EQ(predict_mlp(p, Tensor::Row({1, 2}), acts), Tensor::Row({1, 2}));
  const Activation relu[] = {Activation::kRelu};
  EXPECT_EQ(predict_mlp(p, Tensor::Row({-3, 4}), relu), Tensor::Row({0, 4}));
}

TEST(Mlp, TwoLayerForwardMatchesHandArithmetic) {
  // h = relu([1,1] W0 + b0) = relu([1 - 2 + 0.5, 3 + 0.5 - 1]) = [0, 2.5]
  // y = h W1 + b1 = [0 * 2 + 2.5 * -1 + 0.25] = [-2.25]
  ParamSet p;
  p.add("W0", Tensor::FromRows({{1, 3}, {-2, 0.5}}));
  p.add("b0", Tensor::Row({0.5, -1}));
  p.add("W1", Tensor::FromRows({{2}, {-1}}));
  p.add("b1", Tensor::Row({0.25}));
  const Activation acts[] = {Activation::kRelu, Activation::kIdentity};
  EXPECT_EQ(predict_mlp(p, Tensor::Row({1, 1}), acts), Tensor::Scalar(-2.25));
  ad::Tape tape;
  const auto bound = bind(tape, p);
  EXPECT_EQ(forward_mlp(bound, tape.leaf(Tensor::Row({1, 1})), acts).value(), Tensor::Scalar(-2.25));
}

TEST(Mlp, WrongInputWidthNamesTheLayer) {
  Rng rng(1);
  const MlpSpec spec{{3, 4, 1}, {Activation::kRelu, Activation::kIdentity}};
  const ParamSet p = init_mlp(spec, rng);
  ad::Tape tape;
  const auto bound = bind(tape, p);
  try {
    forward_mlp(bound, tape.leaf(Tensor(2, 5)), spec.activations);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}

TEST(Mlp, InitIsSeededAndBounded) {
  const MlpSpec spec{{10, 20, 5}, {Activation::kRelu, Activation::kIdentity}};
  Rng a(4), b(4);
  const ParamSet pa = init_mlp(spec, a), pb = init_mlp(spec, b);
  EXPECT_EQ(pa, pb);
  const double bound = std::sqrt(6.0 / 30.0);
  for (double v : pa.values(0)) EXPECT_LE(std::abs(v), bound);
  for (double v : pa.values(1)) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, ThreeLayerSmoothLossGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const MlpSpec spec{{4, 6, 5, 3, 1},
                       {Activation::kSigmoid, Activation::kSigmoid, Activation::kSigmoid, Activation::kSigmoid}};
    const ParamSet params = init_mlp(spec, rng);
    const Tensor x = oracle::random_tensor(5, 4, rng);
    std::vector<Tensor> inputs;
    for (std::size_t i = 0; i < params.size(); ++i) inputs.push_back(params[i]);
    const auto fn = [&](ad::Tape& tape, const std::vector<ad::Var>& p) {
      return ad::mean(forward_mlp(p, tape.leaf(x), spec.activations));
    };
    EXPECT_LE(check_gradients(fn, inputs).max_error, 1e-5) << "seed " << seed;
  }
}

TEST(Mlp, PenaltyWeightGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 50);
    const MlpSpec spec{{3, 5, 1}, {Activation::kRelu, Activation::kIdentity}};
    const ParamSet params = init_mlp(spec, rng);
    const Tensor real = oracle::random_tensor(4, 3, rng, 0, 1);
    const Tensor fake = oracle::random_tensor(4, 3, rng, 0, 1);
    const Tensor mix = oracle::random_tensor(4, 1, rng, 0, 1);
    std::vector<Tensor> inputs;
    for (std::size_t i = 0; i < params.size(); ++i) inputs.push_back(params[i]);
    const auto fn = [&](ad::Tape& tape, const std::vector<ad::Var>& p) {
      return gradient_penalty(tape, p, spec.activations, real, fake, mix, 1.0);
    };
    EXPECT_LE(check_gradients(fn, inputs).max_error, 1e-4) << "seed " << seed;
  }
}

}  // namespace
}  // namespace ehrgan
