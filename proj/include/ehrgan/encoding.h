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

// Encoding of feature tables into the [0, 1] matrices the GAN consumes, and
// the inverse decode of (soft) generator output back to a table.
//
// Layout per feature: bernoulli -> 1 column; categorical K -> one-hot of
// width K; continuous with M modes -> one-hot mode block of width M followed
// by one scalar. The scalar is clamp((v - mu_m) / (4 sigma_m), -1, 1) mapped
// to [0, 1] by (s + 1) / 2, with m sampled from the GMM responsibilities.

#ifndef EHRGAN_ENCODING_H_
#define EHRGAN_ENCODING_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ehrgan/gmm.h"
#include "ehrgan/rng.h"
#include "ehrgan/schema.h"
#include "ehrgan/table.h"
#include "ehrgan/tensor.h"

namespace ehrgan {

struct ContinuousCode {
  std::size_t mode = 0;
  double scalar = 0.5;
};

// Scalar for a value within a given mode.
double mode_scalar(double v, const GmmModel& model, std::size_t mode);
ContinuousCode encode_continuous(double v, const GmmModel& model, Rng& rng);
double decode_continuous(std::span<const double> mode_block, double scalar,
                         const GmmModel& model);

// Encodes a feature table (see derive_features). Row r draws its mode
// choices from a stream derived from (seed, r), so the result does not
// depend on how rows are split across threads.
Tensor encode_table(const Table& features, const Schema& schema, std::uint64_t seed);

// Bernoulli thresholded at 0.5, categorical by argmax, continuous inverted
// (count features rounded to the nearest non-negative integer).
Table decode_matrix(const Tensor& matrix, const Schema& schema);

// Classifier inputs: bernoulli 0/1, categorical one-hot, continuous
// standardized by the fitted mixture's mean and stddev. The label is split
// off into `labels`.
struct FeatureMatrix {
  Tensor x;
  std::vector<int> labels;
};
FeatureMatrix featurize(const Table& features, const Schema& schema);
std::size_t featurized_width(const Schema& schema);

// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace ehrgan

#endif  // EHRGAN_ENCODING_H_
