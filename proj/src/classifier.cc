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

#include "ehrgan/classifier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ehrgan/errors.h"
#include "ehrgan/rng.h"

namespace ehrgan {
namespace {

Tensor gather(const Tensor& x, std::span<const std::size_t> rows) {
  Tensor out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace

std::vector<double> Classifier::predict(const Tensor& x) const {
  const Tensor p = predict_mlp(params, x, activations);
  return {p.values().begin(), p.values().end()};
}

double binary_cross_entropy(std::span<const double> p, std::span<const int> labels) {
  if (p.size() != labels.size() || p.empty()) throw DimensionError("binary_cross_entropy: sizes");
  constexpr double kFloor = 1e-12;
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kFloor, 1.0 - kFloor);
    s -= labels[i] == 1 ? std::log(q) : std::log1p(-q);
  }
  return s / static_cast<double>(p.size());
}

Classifier train_classifier(const Tensor& x, std::span<const int> labels, std::uint64_t seed,
                            const ClassifierConfig& config) {
  if (x.rows() != labels.size()) throw DimensionError("train_classifier: rows vs labels");
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos == 0 || pos == static_cast<long>(labels.size())) {
    throw TrainingError("classifier training labels contain a single class");
  }
  if (x.rows() < 2) throw TrainingError("classifier needs at least two rows");

  Rng rng = make_rng(seed, "classifier");
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  shuffle(idx, rng);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.validation_fraction * x.rows())), 1,
      x.rows() - 1);
  const std::vector<std::size_t> val_idx(idx.begin(), idx.begin() + n_val);
  std::vector<std::size_t> train_idx(idx.begin() + n_val, idx.end());
  const Tensor x_val = gather(x, val_idx);
  std::vector<int> y_val;
  for (std::size_t i : val_idx) y_val.push_back(labels[i]);

  MlpSpec spec;
  spec.sizes = {x.cols()};
  spec.sizes.insert(spec.sizes.end(), config.hidden.begin(), config.hidden.end());
  spec.sizes.push_back(1);
  spec.activations.assign(config.hidden.size(), Activation::kRelu);
  spec.activations.push_back(Activation::kSigmoid);

  Classifier model;
  model.activations = spec.activations;
  model.params = init_mlp(spec, rng);
  Optimizer adam(config.optimizer, model.params);

  Classifier best = model;
  best.best_validation_loss = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  const std::size_t batch = std::min(config.batch_size, train_idx.size());
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    shuffle(train_idx, rng);
    for (std::size_t start = 0; start + batch <= train_idx.size(); start += batch) {
      const std::span<const std::size_t> rows(train_idx.data() + start, batch);
      Tensor y(batch, 1);
      for (std::size_t i = 0; i < batch; ++i) y[i] = labels[rows[i]];
      ad::Tape tape;
      const auto bound = bind(tape, model.params);
      const ad::Var logits = forward_mlp_logits(bound, tape.leaf(gather(x, rows)), spec.activations);
      // BCE from logits: softplus(l) - y l.
      const ad::Var loss =
          ad::mean(ad::sub(ad::softplus(logits), ad::mul(tape.leaf(std::move(y)), logits)));
      adam.step(model.params, grad(tape, loss, model.params, bound));
    }
    ++model.epochs_trained;
    const double val_loss = binary_cross_entropy(model.predict(x_val), y_val);
    if (!std::isfinite(val_loss)) throw TrainingError("classifier validation loss is not finite");
    if (val_loss < best.best_validation_loss) {
      best = model;
      best.best_validation_loss = val_loss;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  best.epochs_trained = model.epochs_trained;
  return best;
}

}  // namespace ehrgan
