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
#include <tuple>

#include "ehrgan/errors.h"
#include "ehrgan/kernels.h"
#include "oracles.h"

namespace ehrgan {
namespace {

double max_rel_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

class KernelShapes : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(KernelShapes, ParallelAgreesWithSerial) {
  const auto [n, k, m] = GetParam();
  Rng rng(n * 1000 + k * 10 + m);
  const Tensor a = oracle::random_tensor(n, k, rng);
  const Tensor b = oracle::random_tensor(k, m, rng);
  const Tensor bt = oracle::random_tensor(m, k, rng);
  const Tensor at = oracle::random_tensor(k, n, rng);
  const double tol = 1e-13 * k;
  EXPECT_LE(max_rel_diff(kernels::matmul(a, b), kernels::serial::matmul(a, b)), tol);
  EXPECT_LE(max_rel_diff(kernels::matmul_nt(a, bt), kernels::serial::matmul_nt(a, bt)), tol);
  EXPECT_LE(max_rel_diff(kernels::matmul_tn(at, b), kernels::serial::matmul_tn(at, b)), tol);
}

INSTANTIATE_TEST_SUITE_P(Shapes, KernelShapes,
                         ::testing::Values(std::tuple{1, 1, 1}, std::tuple{1, 7, 3},
                                           std::tuple{3, 1, 17}, std::tuple{8, 16, 16},
                                           std::tuple{9, 5, 33}, std::tuple{64, 50, 512},
                                           std::tuple{256, 128, 100}, std::tuple{17, 300, 1},
                                           std::tuple{250, 64, 63}));

TEST(Kernels, ThreadCountDoesNotChangeBits) {
  Rng rng(12);
  const Tensor a = oracle::random_tensor(200, 150, rng);
  const Tensor b = oracle::random_tensor(150, 170, rng);
  const int saved = kernels::max_threads();
  kernels::set_threads(1);
  const Tensor one = kernels::matmul(a, b);
  const Tensor one_tn = kernels::matmul_tn(kernels::matmul_nt(a, a), a);
  for (int threads : {2, 3, 8}) {
    kernels::set_threads(threads);
    EXPECT_EQ(kernels::matmul(a, b), one) << threads;
    EXPECT_EQ(kernels::matmul_tn(kernels::matmul_nt(a, a), a), one_tn) << threads;
  }
  kernels::set_threads(saved);
}

TEST(Kernels, HandExample) {
  const Tensor a = Tensor::FromRows({{1, 2}, {3, 4}});
  const Tensor b = Tensor::FromRows({{5, 6}, {7, 8}});
  EXPECT_EQ(kernels::matmul(a, b), Tensor::FromRows({{19, 22}, {43, 50}}));
  EXPECT_EQ(kernels::matmul_nt(a, b), Tensor::FromRows({{17, 23}, {39, 53}}));
  EXPECT_EQ(kernels::matmul_tn(a, b), Tensor::FromRows({{26, 30}, {38, 44}}));
}

TEST(Kernels, ShapeMismatchThrows) {
  EXPECT_THROW(kernels::matmul(Tensor(2, 3), Tensor(2, 3)), DimensionError);
  EXPECT_THROW(kernels::serial::matmul_nt(Tensor(2, 3), Tensor(2, 4)), DimensionError);
  EXPECT_THROW(kernels::matmul_tn(Tensor(2, 3), Tensor(3, 3)), DimensionError);
}

TEST(Kernels, DotMatchesNaiveSum) {
  Rng rng(2);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 100u}) {
    const Tensor a = oracle::random_tensor(1, std::max<std::size_t>(n, 1), rng);
    const Tensor b = oracle::random_tensor(1, std::max<std::size_t>(n, 1), rng);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    EXPECT_NEAR(kernels::dot(a.data(), b.data(), n), s, 1e-13);
  }
}

}  // namespace
}  // namespace ehrgan
