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

#include "ehrgan/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "ehrgan/errors.h"
#include "ehrgan/rng.h"

namespace ehrgan {
namespace {

double log_normal_pdf(double v, double mean, double sd) {
  const double z = (v - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Fills log(pi_m) + log N(v | m) for each mode.
void joint_log(const GmmModel& g, double v, std::vector<double>& out) {
  out.resize(g.modes());
  for (std::size_t m = 0; m < g.modes(); ++m) {
    out[m] = g.weights[m] > 0.0
                 ? std::log(g.weights[m]) + log_normal_pdf(v, g.means[m], g.stddevs[m])
                 : -std::numeric_limits<double>::infinity();
  }
}

double mean_log_likelihood(const GmmModel& g, std::span<const double> values) {
  std::vector<double> lj;
  double total = 0.0;
  for (double v : values) {
    joint_log(g, v, lj);
    total += log_sum_exp(lj);
  }
  return total / static_cast<double>(values.size());
}

GmmModel degenerate_fit(std::span<const double> values, int modes) {
  std::map<double, std::size_t> counts;
  for (double v : values) ++counts[v];
  GmmModel g;
  const double n = static_cast<double>(values.size());
  for (const auto& [v, c] : counts) {
    g.weights.push_back(static_cast<double>(c) / n);
    g.means.push_back(v);
    g.stddevs.push_back(kSigmaFloor);
  }
  while (g.modes() < static_cast<std::size_t>(modes)) {
    g.weights.push_back(0.0);
    g.means.push_back(g.means.back());
    g.stddevs.push_back(kSigmaFloor);
  }
  // Renormalize against accumulated rounding.
  double s = 0.0;
  for (double w : g.weights) s += w;
  for (double& w : g.weights) w /= s;
  return g;
}

GmmModel kmeans_init(std::span<const double> values, int modes, Rng& rng) {
  const std::size_t n = values.size();
  std::vector<double> centers;
  centers.push_back(values[uniform_index(rng, n)]);
  std::vector<double> d2(n);
  while (centers.size() < static_cast<std::size_t>(modes)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) break;
    double target = uniform01(rng) * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= d2[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(values[pick]);
  }
  std::sort(centers.begin(), centers.end());

  // A few Lloyd iterations to settle the centers.
  std::vector<std::size_t> assign(n);
  const std::size_t k = centers.size();
  for (int it = 0; it < 20; ++it) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c) {
        if (std::abs(values[i] - centers[c]) < std::abs(values[i] - centers[best])) best = c;
      }
      assign[i] = best;
      sum[best] += values[i];
      ++cnt[best];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (cnt[c] > 0) centers[c] = sum[c] / static_cast<double>(cnt[c]);
    }
  }

  double mean_all = 0.0;
  for (double v : values) mean_all += v;
  mean_all /= static_cast<double>(n);
  double var_all = 0.0;
  for (double v : values) var_all += (v - mean_all) * (v - mean_all);
  var_all /= static_cast<double>(n);

  GmmModel g;
  std::vector<double> sum(k, 0.0), sq(k, 0.0);
  std::vector<std::size_t> cnt(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++cnt[assign[i]];
    sum[assign[i]] += values[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = assign[i];
    const double m = sum[c] / static_cast<double>(cnt[c]);
    sq[c] += (values[i] - m) * (values[i] - m);
  }
  for (std::size_t c = 0; c < k; ++c) {
    // Empty clusters restart as a broad component with a small weight.
    const double w = cnt[c] > 0 ? static_cast<double>(cnt[c]) : 0.5;
    const double var = cnt[c] > 1 ? sq[c] / static_cast<double>(cnt[c]) : var_all;
    g.weights.push_back(w);
    g.means.push_back(centers[c]);
    g.stddevs.push_back(std::max(kSigmaFloor, std::sqrt(var)));
  }
  // k-means++ can stop early when there are fewer distinct centers than modes.
  while (g.modes() < static_cast<std::size_t>(modes)) {
    g.weights.push_back(0.5);
    g.means.push_back(mean_all);
    g.stddevs.push_back(std::max(kSigmaFloor, std::sqrt(var_all)));
  }
  double s = 0.0;
  for (double w : g.weights) s += w;
  for (double& w : g.weights) w /= s;
  return g;
}

}  // namespace

void GmmModel::validate() const {
  if (weights.empty()) throw ConfigError("gmm: no components");
  if (means.size() != weights.size() || stddevs.size() != weights.size()) {
    throw ConfigError("gmm: component arrays differ in length");
  }
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("gmm: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError("gmm: weights sum to " + std::to_string(s));
  for (double sd : stddevs) {
    if (!(sd >= kSigmaFloor)) throw ConfigError("gmm: stddev below floor");
  }
}

std::vector<double> GmmModel::responsibilities(double v) const {
  std::vector<double> lj;
  joint_log(*this, v, lj);
  const double norm = log_sum_exp(lj);
  std::vector<double> r(modes());
  for (std::size_t m = 0; m < modes(); ++m) r[m] = std::exp(lj[m] - norm);
  return r;
}

double GmmModel::log_density(double v) const {
  std::vector<double> lj;
  joint_log(*this, v, lj);
  return log_sum_exp(lj);
}

double GmmModel::mixture_mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < modes(); ++i) m += weights[i] * means[i];
  return m;
}

double GmmModel::mixture_stddev() const {
  const double mu = mixture_mean();
  double v = 0.0;
  for (std::size_t i = 0; i < modes(); ++i) {
    v += weights[i] * (stddevs[i] * stddevs[i] + (means[i] - mu) * (means[i] - mu));
  }
  return std::sqrt(v);
}

GmmFit fit_gmm_trace(std::span<const double> values, int modes, std::uint64_t seed,
                     const GmmFitOptions& options) {
  if (modes < 1) throw ConfigError("fit_gmm: mode count must be >= 1");
  if (values.empty()) throw ConfigError("fit_gmm: no values");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("fit_gmm: non-finite value");
  }

  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  GmmFit fit;
  if (distinct.size() < static_cast<std::size_t>(modes)) {
    fit.model = degenerate_fit(values, modes);
    fit.log_likelihood.push_back(mean_log_likelihood(fit.model, values));
    return fit;
  }

  Rng rng(derive_seed(seed, "gmm-init"));
  GmmModel g = kmeans_init(values, modes, rng);
  const std::size_t n = values.size();
  const std::size_t k = g.modes();
  std::vector<double> resp(n * k);
  std::vector<double> lj;
  fit.log_likelihood.push_back(mean_log_likelihood(g, values));

  for (int it = 0; it < options.max_iterations; ++it) {
    // E step.
    for (std::size_t i = 0; i < n; ++i) {
      joint_log(g, values[i], lj);
      const double norm = log_sum_exp(lj);
      for (std::size_t m = 0; m < k; ++m) resp[i * k + m] = std::exp(lj[m] - norm);
    }
    // M step with the stddev floor as a constraint.
    for (std::size_t m = 0; m < k; ++m) {
      double nk = 0.0, s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + m];
        s += resp[i * k + m] * values[i];
      }
      if (nk <= 0.0) {
        g.weights[m] = 0.0;
        continue;
      }
      const double mean = s / nk;
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - mean;
        var += resp[i * k + m] * d * d;
      }
      var /= nk;
      g.weights[m] = nk / static_cast<double>(n);
      g.means[m] = mean;
      g.stddevs[m] = std::max(kSigmaFloor, std::sqrt(var));
    }
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    for (double& w : g.weights) w /= wsum;

    fit.log_likelihood.push_back(mean_log_likelihood(g, values));
    fit.iterations = it + 1;
    const double delta = fit.log_likelihood.back() - fit.log_likelihood[fit.log_likelihood.size() - 2];
    if (std::abs(delta) < options.tolerance) break;
  }
  fit.model = std::move(g);
  return fit;
}

GmmModel fit_gmm(std::span<const double> values, int modes, std::uint64_t seed,
                 const GmmFitOptions& options) {
  return fit_gmm_trace(values, modes, seed, options).model;
}

}  // namespace ehrgan
