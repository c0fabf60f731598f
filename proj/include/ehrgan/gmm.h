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

// One-dimensional Gaussian mixtures fitted by EM, used for mode-specific
// normalization of continuous columns.

#ifndef EHRGAN_GMM_H_
#define EHRGAN_GMM_H_

#include <cstdint>
#include <span>
#include <vector>

namespace ehrgan {

inline constexpr double kSigmaFloor = 1e-4;

struct GmmModel {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stddevs;

  std::size_t modes() const { return weights.size(); }
  // Throws ConfigError unless weights sum to 1 (1e-9), sizes agree and every
  // stddev is at least kSigmaFloor.
  void validate() const;
  // p(m | v) for every mode.
  std::vector<double> responsibilities(double v) const;
  double log_density(double v) const;
  double mixture_mean() const;
  double mixture_stddev() const;

  friend bool operator==(const GmmModel&, const GmmModel&) = default;
};

struct GmmFitOptions {
  int max_iterations = 200;
  // Stop when the mean per-sample log-likelihood changes by less than this.
  double tolerance = 1e-6;
};

struct GmmFit {
  GmmModel model;
  // Mean per-sample log-likelihood after initialization and after each EM
  // iteration.
  std::vector<double> log_likelihood;
  int iterations = 0;
};

// k-means++ seeded initialization followed by EM. Fewer than `modes` distinct
// values is handled without EM: one point-mass component per distinct value
// (weight = frequency, stddev = kSigmaFloor) and zero-weight duplicates to pad.
GmmFit fit_gmm_trace(std::span<const double> values, int modes, std::uint64_t seed,
                     const GmmFitOptions& options = {});
GmmModel fit_gmm(std::span<const double> values, int modes, std::uint64_t seed,
                 const GmmFitOptions& options = {});

}  // namespace ehrgan

#endif  // EHRGAN_GMM_H_
