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

// Seeded random streams. A run has one 64-bit seed; every consumer (data,
// init, batching, DP noise, evaluation, ...) derives its own stream from it by
// name so components can be replayed independently.

#ifndef EHRGAN_RNG_H_
#define EHRGAN_RNG_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace ehrgan {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}
// Standard normal via Box-Muller; consumes two draws per call.
double normal(Rng& rng);
// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

std::string rng_state(const Rng& rng);
void set_rng_state(Rng& rng, const std::string& state);

}  // namespace ehrgan

#endif  // EHRGAN_RNG_H_
