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

// First-order optimizers over ParamSets.

#ifndef EHRGAN_OPTIMIZER_H_
#define EHRGAN_OPTIMIZER_H_

#include <cstdint>
#include <string>

#include "ehrgan/param_set.h"

namespace ehrgan {

enum class OptimizerKind { kAdam, kRmsProp };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-4;
  double beta1 = 0.5;  // Adam only
  double beta2 = 0.9;  // Adam second moment; RMSProp decay
  double epsilon = 1e-8;

  void validate() const;
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

// Adam with bias correction:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
//   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
// RMSProp:
//   v <- d v + (1 - d) g^2,  p <- p - lr * g / (sqrt(v) + eps).
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerConfig config, const ParamSet& like);

  void step(ParamSet& params, const ParamSet& gradient);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps() const { return steps_; }
  const ParamSet& first_moment() const { return m_; }
  const ParamSet& second_moment() const { return v_; }

  // Restores buffers read back from a checkpoint.
  void restore(std::uint64_t steps, ParamSet m, ParamSet v);

  friend bool operator==(const Optimizer&, const Optimizer&) = default;

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  ParamSet m_;
  ParamSet v_;
};

}  // namespace ehrgan

#endif  // EHRGAN_OPTIMIZER_H_
