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

// Fidelity and utility metrics.

#ifndef EHRGAN_METRICS_H_
#define EHRGAN_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehrgan/schema.h"
#include "ehrgan/tensor.h"

namespace ehrgan {

// How a (possibly soft) encoded block is read as a discrete value.
enum class Assignment {
  kArgmax,     // bernoulli >= 0.5, categorical argmax
  kThreshold,  // every column >= 0.5 independently (diagnostic)
};

// Per-column discrete frequencies of an encoded matrix: bernoulli columns and
// categorical blocks only, in schema order.
struct DiscreteMarginals {
  std::vector<double> bernoulli;                 // one p per bernoulli feature
  std::vector<std::vector<double>> categorical;  // one vector per categorical feature
};
DiscreteMarginals discrete_marginals(const Tensor& encoded, const Schema& schema,
                                     Assignment assignment = Assignment::kArgmax);

// Mean |p_real - p_synth| over bernoulli features. Empty when the schema has
// none.
std::optional<double> bernoulli_divergence(const Tensor& real, const Tensor& synth,
                                           const Schema& schema);
// Mean |p_real,i - p_synth,i| over every (categorical feature, category).
std::optional<double> categorical_divergence(const Tensor& real, const Tensor& synth,
                                             const Schema& schema);

struct CategorySumCheck {
  std::vector<std::string> features;
  std::vector<double> sums;
  double mean_deviation = 0.0;  // mean |sum - 1|
};
CategorySumCheck category_sum_check(const Tensor& synth, const Schema& schema,
                                    Assignment assignment);

// | ||real||_F - ||synth||_F |; row counts must match.
double frobenius_divergence(const Tensor& real, const Tensor& synth);

// `n` distinct rows drawn uniformly (seeded), or every row if there are fewer.
Tensor sample_rows(const Tensor& m, std::size_t n, std::uint64_t seed);

// Mann-Whitney statistic; ties count one half.
double auroc(std::span<const double> scores, std::span<const int> labels);
// Average precision: sum over distinct score thresholds of
// (recall_k - recall_{k-1}) * precision_k.
double auprc(std::span<const double> scores, std::span<const int> labels);
// Fraction with (score >= threshold) == label.
double accuracy(std::span<const double> scores, std::span<const int> labels,
                double threshold = 0.5);

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 * sample sd / sqrt(n); 0 for n = 1
  std::vector<double> values;
};
Interval confidence_interval(std::span<const double> values);

// Pearson correlation of average ranks (ties share their mean rank).
// +inf sorts above every finite value. Throws MetricUndefinedError when
// either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace ehrgan

#endif  // EHRGAN_METRICS_H_
