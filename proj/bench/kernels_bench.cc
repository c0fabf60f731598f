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

// Parallel kernels against their serial references, and the factored DP
// clipping pass against one tape per example.

#include <benchmark/benchmark.h>

#include "ehrgan/gan.h"
#include "ehrgan/kernels.h"
#include "ehrgan/rng.h"

namespace {

using ehrgan::Tensor;

Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
  ehrgan::Rng rng(seed);
  Tensor t(r, c);
  for (double& v : t.values()) v = ehrgan::uniform(rng, -1.0, 1.0);
  return t;
}

template <Tensor (*Fn)(const Tensor&, const Tensor&)>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor(n, n, 1);
  const Tensor b = random_tensor(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

BENCHMARK(BM_Matmul<ehrgan::kernels::matmul>)->Name("matmul/parallel")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Matmul<ehrgan::kernels::serial::matmul>)->Name("matmul/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Matmul<ehrgan::kernels::matmul_nt>)->Name("matmul_nt/parallel")->Arg(256);
BENCHMARK(BM_Matmul<ehrgan::kernels::serial::matmul_nt>)->Name("matmul_nt/serial")->Arg(256);
BENCHMARK(BM_Matmul<ehrgan::kernels::matmul_tn>)->Name("matmul_tn/parallel")->Arg(256);
BENCHMARK(BM_Matmul<ehrgan::kernels::serial::matmul_tn>)->Name("matmul_tn/serial")->Arg(256);

void BM_DpCriticStep(benchmark::State& state) {
  const bool per_example = state.range(0) != 0;
  const std::size_t width = 50, batch = 64;
  auto config = ehrgan::GanConfig::defaults(ehrgan::Variant::kWganGp, width);
  config.batch_size = batch;
  ehrgan::GanState gan = ehrgan::init_gan(config, 7);
  Tensor real = random_tensor(batch, width, 3);
  for (double& v : real.values()) v = 0.5 + 0.5 * v;
  ehrgan::DpTraining dp;
  dp.config = {1.0, 1.0, 1e9, 1e-5};
  dp.per_example_tapes = per_example;
  for (auto _ : state) benchmark::DoNotOptimize(ehrgan::critic_step(gan, real, &dp, 0.01));
}

BENCHMARK(BM_DpCriticStep)->Name("dp_critic_step/factored")->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DpCriticStep)->Name("dp_critic_step/per_example")->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
