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

#include "ehrgan/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ehrgan/errors.h"

namespace ehrgan {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)), a >= b.
double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (a <= b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows past here.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) - 15.0 / (8.0 * x2 * x2 * x2);
  return -x2 - std::log(x) - 0.5 * std::log(M_PI) + std::log(series);
}

// log A_alpha for integer alpha: binomial expansion of
// E_{z ~ N(0, s^2)} [((1 - q) + q exp((2z - 1) / (2 s^2)))^alpha].
double log_a_int(int alpha, double q, double sigma) {
  double log_a = kNegInf;
  const double lq = std::log(q);
  const double l1q = std::log1p(-q);
  for (int i = 0; i <= alpha; ++i) {
    const double log_coef = std::lgamma(alpha + 1.0) - std::lgamma(i + 1.0) -
                            std::lgamma(alpha - i + 1.0);
    const double term = log_coef + i * lq + (alpha - i) * l1q +
                        (static_cast<double>(i) * i - i) / (2.0 * sigma * sigma);
    log_a = log_add(log_a, term);
  }
  return log_a;
}

// log A_alpha for fractional alpha via the two-sided erfc series.
double log_a_frac(double alpha, double q, double sigma) {
  double log_a0 = kNegInf;
  double log_a1 = kNegInf;
  const double s2 = sigma * sigma;
  const double z0 = s2 * std::log(1.0 / q - 1.0) + 0.5;
  double coef = 1.0;  // generalized binomial(alpha, i)
  for (int i = 0;; ++i) {
    if (i > 0) coef *= (alpha - i + 1.0) / i;
    if (coef == 0.0) break;
    const double log_coef = std::log(std::abs(coef));
    const double j = alpha - i;
    const double log_t0 = log_coef + i * std::log(q) + j * std::log1p(-q);
    const double log_t1 = log_coef + j * std::log(q) + i * std::log1p(-q);
    const double log_e0 = std::log(0.5) + log_erfc((i - z0) / (M_SQRT2 * sigma));
    const double log_e1 = std::log(0.5) + log_erfc((z0 - j) / (M_SQRT2 * sigma));
    const double log_s0 = log_t0 + (static_cast<double>(i) * i - i) / (2.0 * s2) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2.0 * s2) + log_e1;
    if (coef > 0.0) {
      log_a0 = log_add(log_a0, log_s0);
      log_a1 = log_add(log_a1, log_s1);
    } else {
      log_a0 = log_sub(log_a0, log_s0);
      log_a1 = log_sub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0 || i > 100000) break;
  }
  return log_add(log_a0, log_a1);
}

}  // namespace

const std::vector<double>& default_orders() {
  static const std::vector<double> orders = [] {
    std::vector<double> o = {1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0, 3.5, 4.0, 4.5};
    for (int a = 5; a <= 64; ++a) o.push_back(a);
    for (double a : {80.0, 96.0, 128.0, 192.0, 256.0, 384.0, 512.0}) o.push_back(a);
    return o;
  }();
  return orders;
}

double rdp_step(double alpha, double q, double sigma) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw DomainError("Renyi order must be finite and > 1, got " + std::to_string(alpha));
  }
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("sampling rate must lie in (0, 1]");
  if (!(sigma > 0.0)) throw DomainError("noise multiplier must be positive");
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  const double log_a = alpha == std::floor(alpha) ? log_a_int(static_cast<int>(alpha), q, sigma)
                                                  : log_a_frac(alpha, q, sigma);
  return std::max(0.0, log_a / (alpha - 1.0));
}

AccountantState::AccountantState() : AccountantState(default_orders()) {}

AccountantState::AccountantState(std::vector<double> orders)
    : orders_(std::move(orders)), rdp_(orders_.size(), 0.0) {
  for (double a : orders_) {
    if (!(a > 1.0)) throw DomainError("Renyi orders must exceed 1");
  }
}

void AccountantState::add_steps(double q, double sigma, std::uint64_t count) {
  if (count == 0) return;
  if (q != cached_q_ || sigma != cached_sigma_) {
    cached_step_.resize(orders_.size());
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      cached_step_[i] = rdp_step(orders_[i], q, sigma);
    }
    cached_q_ = q;
    cached_sigma_ = sigma;
  }
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    rdp_[i] += static_cast<double>(count) * cached_step_[i];
  }
  steps_ += count;
}

double AccountantState::epsilon(double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    best = std::min(best, rdp_[i] + std::log(1.0 / delta) / (orders_[i] - 1.0));
  }
  return best;
}

double AccountantState::optimal_order(double delta) const {
  double best = std::numeric_limits<double>::infinity();
  double order = orders_.front();
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const double e = rdp_[i] + std::log(1.0 / delta) / (orders_[i] - 1.0);
    if (e < best) {
      best = e;
      order = orders_[i];
    }
  }
  return order;
}

void AccountantState::restore(std::uint64_t steps, std::vector<double> rdp) {
  if (rdp.size() != orders_.size()) throw FormatError("accountant restore: order count mismatch");
  steps_ = steps;
  rdp_ = std::move(rdp);
}

double epsilon_at(const AccountantState& state, double delta) { return state.epsilon(delta); }

bool budget_exhausted(const AccountantState& state, const DpConfig& config) {
  return state.epsilon(config.delta) > config.target_epsilon;
}

double compute_epsilon(double q, double sigma, std::uint64_t steps, double delta) {
  AccountantState s;
  s.add_steps(q, sigma, steps);
  return s.epsilon(delta);
}

double calibrate_noise(double target_epsilon, double delta, double q, std::uint64_t steps) {
  if (!(target_epsilon > 0.0)) throw ConfigError("target epsilon must be positive");
  if (steps == 0) throw ConfigError("cannot calibrate noise for zero steps");
  double lo = 1e-3;
  double hi = 1.0;
  while (compute_epsilon(q, hi, steps, delta) > target_epsilon) {
    hi *= 2.0;
    if (hi > 1e6) throw ConfigError("target epsilon unreachable with any noise multiplier");
  }
  if (compute_epsilon(q, lo, steps, delta) <= target_epsilon) return lo;
  while (hi - lo > 1e-4 * hi) {
    const double mid = 0.5 * (lo + hi);
    (compute_epsilon(q, mid, steps, delta) > target_epsilon ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace ehrgan
