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

#include "ehrgan/dp.h"

#include <algorithm>
#include <cmath>

#include "ehrgan/kernels.h"

#include "ehrgan/errors.h"

namespace ehrgan {

void DpConfig::validate() const {
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be positive");
  if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier)) {
    throw ConfigError("noise multiplier must be finite and non-negative");
  }
  if (noise_multiplier > 0.0 && std::isinf(clip_norm)) {
    throw ConfigError("noise needs a finite clip norm");
  }
  if (!(target_epsilon > 0.0)) throw ConfigError("target epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
}

double clip_per_example(ParamSet& g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ContractError("clip norm must be positive");
  const double norm = global_norm(g);
  if (std::isinf(clip_norm) || norm <= clip_norm) return norm;
  double factor = clip_norm / norm;
  // Rounding can leave the scaled norm an ulp or two above C; aim just below.
  if (factor * norm > clip_norm) factor = std::nextafter(factor, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (double& x : g.values(i)) x *= factor;
  }
  const double scaled = global_norm(g);
  if (scaled > clip_norm) {
    const double shrink = clip_norm / scaled * (1.0 - 0x1.0p-50);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (double& x : g.values(i)) x *= shrink;
    }
  }
  return norm;
}

void accumulate(ParamSet& sum, const ParamSet& g) {
  if (!sum.same_layout(g)) throw DimensionError("accumulate: layout mismatch");
  for (std::size_t i = 0; i < sum.size(); ++i) {
    auto s = sum.values(i);
    auto v = g.values(i);
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += v[j];
  }
}

void noise_and_average(ParamSet& sum, std::size_t batch_size, double clip_norm,
                       double noise_multiplier, Rng& rng) {
  if (batch_size == 0) throw ContractError("noisy mean of an empty batch");
  const double stddev = noise_multiplier * clip_norm;
  const auto b = static_cast<double>(batch_size);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    for (double& x : sum.values(i)) {
      if (noise_multiplier > 0.0) x += stddev * normal(rng);
      x /= b;
    }
  }
}

ParamSet noisy_mean(std::span<const ParamSet> clipped, double clip_norm,
                    double noise_multiplier, Rng& rng) {
  if (clipped.empty()) throw ContractError("noisy mean of an empty batch");
  ParamSet sum = clipped.front().zeros_like();
  for (const ParamSet& g : clipped) accumulate(sum, g);
  noise_and_average(sum, clipped.size(), clip_norm, noise_multiplier, rng);
  return sum;
}

namespace {

// Row r of `a` dotted with row r of `b`.
void row_dots(const Tensor& a, const Tensor& b, std::vector<double>& out) {
  out.resize(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    out[r] = kernels::dot(a.data() + r * a.cols(), b.data() + r * b.cols(), a.cols());
  }
}

}  // namespace

ParamSet clipped_gradient_sum(ad::Tape& tape, ad::Var objective, const ParamSet& like,
                              std::span<const ad::Var> bound, double example_scale,
                              double clip_norm, std::vector<double>* norms) {
  if (bound.size() != like.size()) {
    throw ContractError("clipped_gradient_sum: bound parameter count mismatch");
  }
  if (!(clip_norm > 0.0)) throw ContractError("clip norm must be positive");
  const std::vector<ad::GradientFactors> factors = tape.factored_gradients(objective, bound);

  // Examples = rows of the factors; every factor must agree.
  std::size_t batch = 0;
  bool seen = false;
  auto check_rows = [&](const ad::Var& v) {
    if (!seen) {
      batch = v.rows();
      seen = true;
    } else if (v.rows() != batch) {
      throw DimensionError("clipped_gradient_sum: factors disagree on the example count");
    }
  };
  for (const auto& f : factors) {
    for (const auto& [l, r] : f.outer) {
      check_rows(l);
      check_rows(r);
    }
    for (const auto& g : f.rows) check_rows(g);
  }

  // Squared per-example norms: ||sum_k l_k r_k^T||_F^2 =
  // sum_{k,k'} (l_k . l_k') (r_k . r_k') for weights; direct for biases.
  std::vector<double> sq(batch, 0.0);
  std::vector<double> dl, dr;
  for (const auto& f : factors) {
    for (std::size_t k = 0; k < f.outer.size(); ++k) {
      for (std::size_t k2 = k; k2 < f.outer.size(); ++k2) {
        row_dots(f.outer[k].first.value(), f.outer[k2].first.value(), dl);
        row_dots(f.outer[k].second.value(), f.outer[k2].second.value(), dr);
        const double mult = k == k2 ? 1.0 : 2.0;
        for (std::size_t i = 0; i < batch; ++i) sq[i] += mult * dl[i] * dr[i];
      }
    }
    if (!f.rows.empty()) {
      const std::size_t width = f.rows.front().cols();
      std::vector<double> acc(width);
      for (std::size_t i = 0; i < batch; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const auto& g : f.rows) {
          const double* row = g.value().data() + i * width;
          for (std::size_t c = 0; c < width; ++c) acc[c] += row[c];
        }
        sq[i] += kernels::dot(acc.data(), acc.data(), width);
      }
    }
  }

  // Example i contributes weight example_scale * min(1, C / n_i).
  std::vector<double> weight(batch);
  if (norms != nullptr) norms->resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const double n = example_scale * std::sqrt(std::max(0.0, sq[i]));
    if (norms != nullptr) (*norms)[i] = n;
    double c = 1.0;
    if (!std::isinf(clip_norm) && n > clip_norm) {
      c = clip_norm / n;
      if (c * n > clip_norm) c = std::nextafter(c, 0.0);
    }
    weight[i] = example_scale * c;
  }

  ParamSet sum;
  for (std::size_t p = 0; p < like.size(); ++p) {
    Tensor total(like[p].rows(), like[p].cols());
    bool first = true;
    auto add_term = [&](Tensor term) {
      if (!term.same_shape(total)) {
        throw DimensionError("clipped_gradient_sum: factor shape does not match '" +
                             like.name(p) + "'");
      }
      if (first) {
        total = std::move(term);
        first = false;
      } else {
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += term[j];
      }
    };
    for (const auto& [l, r] : factors[p].outer) {
      Tensor lw = l.value();
      for (std::size_t i = 0; i < batch; ++i) {
        for (double& v : lw.row(i)) v *= weight[i];
      }
      add_term(kernels::matmul_tn(lw, r.value()));
    }
    for (const auto& g : factors[p].rows) {
      const Tensor& gv = g.value();
      Tensor t(1, gv.cols());
      for (std::size_t i = 0; i < batch; ++i) {
        const double* row = gv.data() + i * gv.cols();
        for (std::size_t c = 0; c < gv.cols(); ++c) t[c] += weight[i] * row[c];
      }
      add_term(std::move(t));
    }
    sum.add(like.name(p), std::move(total));
  }
  return sum;
}

void dp_adam_step(Optimizer& adam, ParamSet& params, const ParamSet& noisy_gradient) {
  adam.step(params, noisy_gradient);
}

}  // namespace ehrgan
