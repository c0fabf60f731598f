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

// Independent reference computations shared by the unit tests and the
// acceptance binary: finite differences, brute-force AUROC, a numerically
// integrated subsampled-Gaussian RDP, and random instance builders.

#ifndef EHRGAN_TESTS_ORACLES_H_
#define EHRGAN_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ehrgan/autodiff.h"
#include "ehrgan/rng.h"
#include "ehrgan/tensor.h"

namespace ehrgan::oracle {

inline Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(r, c);
  for (double& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

// Values bounded away from zero (for relu kinks and reciprocal-like ops).
inline Tensor away_from_zero(std::size_t r, std::size_t c, Rng& rng, double lo, double hi) {
  Tensor t(r, c);
  for (double& v : t.values()) v = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, lo, hi);
  return t;
}

using ScalarFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

inline double evaluate(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.leaf(t));
  return f(tape, vars).value().item();
}

struct GradCheck {
  double max_error = 0.0;  // per component: |g - fd| / max(|fd|, floor)
  std::size_t components = 0;
};

// Tape gradient of `f` against central differences with step `h`. With
// `sample` > 0 only that many randomly chosen components are checked.
inline GradCheck check_gradients(const ScalarFn& f, std::vector<Tensor> inputs, double h = 1e-5,
                                 double floor = 1e-2, std::size_t sample = 0, Rng* rng = nullptr) {
  std::vector<Tensor> analytic;
  {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.leaf(t));
    const ad::Var out = f(tape, vars);
    for (const auto& g : tape.gradients(out, vars)) analytic.push_back(g.value());
  }
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t j = 0; j < inputs[i].size(); ++j) coords.emplace_back(i, j);
  if (sample > 0 && rng != nullptr && sample < coords.size()) {
    for (std::size_t k = 0; k < sample; ++k) {
      std::swap(coords[k], coords[k + uniform_index(*rng, coords.size() - k)]);
    }
    coords.resize(sample);
  }
  GradCheck out;
  for (auto [i, j] : coords) {
    const double x = inputs[i][j];
    inputs[i][j] = x + h;
    const double up = evaluate(f, inputs);
    inputs[i][j] = x - h;
    const double down = evaluate(f, inputs);
    inputs[i][j] = x;
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i][j] - fd) / std::max(std::abs(fd), floor);
    out.max_error = std::max(out.max_error, err);
    ++out.components;
  }
  return out;
}

// sum(weights .* v), the generic scalar probe of a tensor-valued op.
inline ad::Var probe(ad::Tape& tape, ad::Var v, Rng& rng) {
  return ad::sum(ad::mul(v, tape.leaf(random_tensor(v.rows(), v.cols(), rng))));
}

struct PrimitiveCase {
  std::string name;
  std::vector<Tensor> inputs;
  // op applied to the bound inputs; the result is probed to a scalar.
  std::function<ad::Var(const std::vector<ad::Var>&)> op;
};

// One random instance of every primitive and composite, shapes drawn from
// `rng`. Inputs of non-smooth or singular ops stay away from the kinks.
inline std::vector<PrimitiveCase> primitive_cases(Rng& rng) {
  using namespace ad;
  auto dim = [&] { return static_cast<std::size_t>(1 + uniform_index(rng, 4)); };
  const std::size_t n = dim(), k = dim(), m = dim();
  auto r = [&](std::size_t a, std::size_t b) { return random_tensor(a, b, rng); };
  auto pos = [&](std::size_t a, std::size_t b) { return random_tensor(a, b, rng, 0.5, 2.0); };
  auto nz = [&](std::size_t a, std::size_t b) { return away_from_zero(a, b, rng, 0.05, 1.5); };
  std::vector<PrimitiveCase> c;
  c.push_back({"matmul", {r(n, k), r(k, m)}, [](auto& v) { return matmul(v[0], v[1]); }});
  c.push_back({"matmul_nt", {r(n, k), r(m, k)}, [](auto& v) { return matmul_nt(v[0], v[1]); }});
  c.push_back({"matmul_tn", {r(k, n), r(k, m)}, [](auto& v) { return matmul_tn(v[0], v[1]); }});
  c.push_back({"add_bias", {r(n, m), r(1, m)}, [](auto& v) { return add_bias(v[0], v[1]); }});
  c.push_back({"add", {r(n, m), r(n, m)}, [](auto& v) { return add(v[0], v[1]); }});
  c.push_back({"sub", {r(n, m), r(n, m)}, [](auto& v) { return sub(v[0], v[1]); }});
  c.push_back({"mul", {r(n, m), r(n, m)}, [](auto& v) { return mul(v[0], v[1]); }});
  c.push_back({"div", {r(n, m), pos(n, m)}, [](auto& v) { return div(v[0], v[1]); }});
  const double s = uniform(rng, -2.0, 2.0);
  c.push_back({"scale", {r(n, m)}, [s](auto& v) { return scale(v[0], s); }});
  c.push_back({"add_scalar", {r(n, m)}, [s](auto& v) { return add_scalar(v[0], s); }});
  c.push_back({"relu", {nz(n, m)}, [](auto& v) { return relu(v[0]); }});
  c.push_back({"sigmoid", {r(n, m)}, [](auto& v) { return sigmoid(v[0]); }});
  c.push_back({"softplus", {r(n, m)}, [](auto& v) { return softplus(v[0]); }});
  c.push_back({"log", {pos(n, m)}, [](auto& v) { return log(v[0]); }});
  c.push_back({"sqrt", {pos(n, m)}, [](auto& v) { return sqrt(v[0]); }});
  c.push_back({"square", {r(n, m)}, [](auto& v) { return square(v[0]); }});
  c.push_back({"reciprocal", {nz(n, m)}, [](auto& v) { return reciprocal(v[0]); }});
  c.push_back({"sum", {r(n, m)}, [](auto& v) { return sum(v[0]); }});
  c.push_back({"sum_rows", {r(n, m)}, [](auto& v) { return sum_rows(v[0]); }});
  c.push_back({"sum_cols", {r(n, m)}, [](auto& v) { return sum_cols(v[0]); }});
  c.push_back({"broadcast_scalar", {r(1, 1)}, [n, m](auto& v) { return broadcast_scalar(v[0], n, m); }});
  c.push_back({"broadcast_rows", {r(1, m)}, [n](auto& v) { return broadcast_rows(v[0], n); }});
  c.push_back({"broadcast_cols", {r(n, 1)}, [m](auto& v) { return broadcast_cols(v[0], m); }});
  c.push_back({"mean", {r(n, m)}, [](auto& v) { return mean(v[0]); }});
  c.push_back({"one_minus", {r(n, m)}, [](auto& v) { return one_minus(v[0]); }});
  c.push_back({"row_norms", {nz(n, m)}, [](auto& v) { return row_norms(v[0]); }});
  return c;
}

// Scalar objective of a primitive case: probe(op(inputs)).
inline ScalarFn first_order(const PrimitiveCase& pc, std::uint64_t probe_seed) {
  return [pc, probe_seed](ad::Tape& tape, const std::vector<ad::Var>& v) {
    Rng rng(probe_seed);
    return probe(tape, pc.op(v), rng);
  };
}

// Scalar built from the (tape-recorded) gradient of the first-order
// objective with respect to input 0; differentiating it exercises the
// backward rules themselves.
inline ScalarFn second_order(const PrimitiveCase& pc, std::uint64_t probe_seed) {
  return [pc, probe_seed](ad::Tape& tape, const std::vector<ad::Var>& v) {
    Rng rng(probe_seed);
    const ad::Var inner = probe(tape, pc.op(v), rng);
    const ad::Var g = tape.gradients(inner, std::span(v).subspan(0, 1))[0];
    return probe(tape, g, rng);
  };
}

// Fraction of (positive, negative) pairs ranked correctly, ties one half.
inline double brute_force_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / pairs;
}

// RDP of order alpha for the sampled Gaussian mechanism, by direct
// quadrature of E_{z~mu0}[(mu(z) / mu0(z))^alpha] with
// mu0 = N(0, sigma^2), mu = (1 - q) mu0 + q N(1, sigma^2). Works for any
// real alpha > 1. Composite Simpson on a wide window, in log space.
inline double integrated_rdp(double alpha, double q, double sigma) {
  const double lo = -40.0 * sigma - 10.0;
  const double hi = 40.0 * sigma + 10.0 + alpha / sigma;
  const int n = 400000;
  const double h = (hi - lo) / n;
  std::vector<double> logs(n + 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double z = lo + h * i;
    const double log_mu0 = -z * z / (2 * sigma * sigma);
    // log ratio mu / mu0 = log(1 - q + q exp((2z - 1) / (2 sigma^2)))
    const double t = (2 * z - 1) / (2 * sigma * sigma);
    double log_ratio;
    if (t > 0) {
      log_ratio = t + std::log(q + (1 - q) * std::exp(-t));
    } else {
      log_ratio = std::log1p(q * std::expm1(t));
    }
    logs[i] = log_mu0 + alpha * log_ratio;
    peak = std::max(peak, logs[i]);
  }
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::exp(logs[i] - peak);
  }
  const double log_integral = std::log(acc * h / 3.0) + peak - std::log(std::sqrt(2 * M_PI) * sigma);
  return log_integral / (alpha - 1.0);
}

// Epsilon from the integrated RDP over its own dense order grid.
inline double integrated_epsilon(double q, double sigma, double steps, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (double a = 1.1; a <= 256.0; a *= 1.05) {
    best = std::min(best, steps * integrated_rdp(a, q, sigma) + std::log(1.0 / delta) / (a - 1.0));
  }
  return best;
}

}  // namespace ehrgan::oracle

#endif  // EHRGAN_TESTS_ORACLES_H_
