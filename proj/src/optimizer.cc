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

#include "ehrgan/optimizer.h"

#include <cmath>

#include "ehrgan/errors.h"

namespace ehrgan {

std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::kAdam ? "adam" : "rmsprop";
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "rmsprop") return OptimizerKind::kRmsProp;
  throw ConfigError("unknown optimizer '" + s + "' (expected adam or rmsprop)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("optimizer learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("optimizer beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optimizer beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("optimizer epsilon must be positive");
}

Optimizer::Optimizer(OptimizerConfig config, const ParamSet& like)
    : config_(config), m_(like.zeros_like()), v_(like.zeros_like()) {
  config_.validate();
}

void Optimizer::step(ParamSet& params, const ParamSet& gradient) {
  if (!params.same_layout(m_) || !gradient.same_layout(m_)) {
    throw DimensionError("optimizer step: parameter or gradient layout mismatch");
  }
  ++steps_;
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  if (config_.kind == OptimizerKind::kAdam) {
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params.values(i);
      auto g = gradient.values(i);
      auto m = m_.values(i);
      auto v = v_.values(i);
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = b1 * m[j] + (1.0 - b1) * g[j];
        v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
        p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
      }
    }
  } else {
    const double d = config_.beta2;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params.values(i);
      auto g = gradient.values(i);
      auto v = v_.values(i);
      for (std::size_t j = 0; j < p.size(); ++j) {
        v[j] = d * v[j] + (1.0 - d) * g[j] * g[j];
        p[j] -= lr * g[j] / (std::sqrt(v[j]) + eps);
      }
    }
  }
}

void Optimizer::restore(std::uint64_t steps, ParamSet m, ParamSet v) {
  if (!m.same_layout(m_) || !v.same_layout(v_)) {
    throw FormatError("optimizer restore: buffer layout mismatch");
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace ehrgan
