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

// Downstream binary classifier: a ReLU MLP with a sigmoid output trained on
// binary cross-entropy with Adam and early stopping on a held-out split.

#ifndef EHRGAN_CLASSIFIER_H_
#define EHRGAN_CLASSIFIER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ehrgan/mlp.h"
#include "ehrgan/optimizer.h"
#include "ehrgan/param_set.h"
#include "ehrgan/tensor.h"

namespace ehrgan {

struct ClassifierConfig {
  std::vector<std::size_t> hidden = {256, 128, 64};
  OptimizerConfig optimizer = {OptimizerKind::kAdam, 1e-3, 0.9, 0.999, 1e-8};
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  double validation_fraction = 0.1;
};

struct Classifier {
  ParamSet params;
  std::vector<Activation> activations;
  std::size_t epochs_trained = 0;
  double best_validation_loss = 0.0;

  // P(label = 1) per row.
  std::vector<double> predict(const Tensor& x) const;
};

// Keeps the parameters with the lowest validation loss; stops after
// `patience` epochs without improvement.
Classifier train_classifier(const Tensor& x, std::span<const int> labels, std::uint64_t seed,
                            const ClassifierConfig& config = {});

// Mean binary cross-entropy of `p` against `labels`.
double binary_cross_entropy(std::span<const double> p, std::span<const int> labels);

}  // namespace ehrgan

#endif  // EHRGAN_CLASSIFIER_H_
