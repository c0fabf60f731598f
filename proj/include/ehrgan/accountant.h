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

// Renyi-DP accounting for the subsampled Gaussian mechanism and conversion
// to (epsilon, delta).

#ifndef EHRGAN_ACCOUNTANT_H_
#define EHRGAN_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ehrgan/dp.h"

namespace ehrgan {

// Default order grid, 1.25 ... 512.
const std::vector<double>& default_orders();

// RDP of one step of the Gaussian mechanism with noise multiplier `sigma`
// applied to a Poisson-style sample at rate `q`. q = 1 is the closed form
// alpha / (2 sigma^2).
double rdp_step(double alpha, double q, double sigma);

class AccountantState {
 public:
  AccountantState();
  explicit AccountantState(std::vector<double> orders);

  void add_steps(double q, double sigma, std::uint64_t count = 1);

  // min over orders of rdp(alpha) + log(1/delta) / (alpha - 1).
  double epsilon(double delta) const;
  // Order achieving the minimum.
  double optimal_order(double delta) const;

  std::uint64_t steps() const { return steps_; }
  std::span<const double> orders() const { return orders_; }
  std::span<const double> rdp() const { return rdp_; }

  // Restores accumulated values (e.g. from a manifest).
  void restore(std::uint64_t steps, std::vector<double> rdp);

 private:
  std::vector<double> orders_;
  std::vector<double> rdp_;
  std::uint64_t steps_ = 0;
  // Per-order increments for the last (q, sigma) seen.
  double cached_q_ = -1.0;
  double cached_sigma_ = -1.0;
  std::vector<double> cached_step_;
};

double epsilon_at(const AccountantState& state, double delta);
bool budget_exhausted(const AccountantState& state, const DpConfig& config);

// Epsilon after `steps` steps at (q, sigma).
double compute_epsilon(double q, double sigma, std::uint64_t steps, double delta);

// Smallest noise multiplier (to ~1e-4 relative) whose epsilon after `steps`
// steps does not exceed `target_epsilon`.
double calibrate_noise(double target_epsilon, double delta, double q, std::uint64_t steps);

}  // namespace ehrgan

#endif  // EHRGAN_ACCOUNTANT_H_
