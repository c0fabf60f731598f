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

// Principal component projection of several datasets onto shared axes.

#ifndef EHRGAN_PCA_H_
#define EHRGAN_PCA_H_

#include <string>
#include <utility>
#include <vector>

#include "ehrgan/tensor.h"

namespace ehrgan {

struct PcaResult {
  Tensor mean;                     // 1 x d, of the pooled data
  Tensor components;               // k x d, unit rows, largest variance first
  std::vector<double> explained;   // variance along each component
  std::vector<double> eigenvalues; // full covariance spectrum, descending
  std::vector<std::string> labels;
  std::vector<Tensor> projections;  // one n_i x k per dataset
};

// Axes from the eigendecomposition of the pooled, mean-centred covariance.
// Each axis is signed so its largest-magnitude entry is positive.
PcaResult pca_project(const std::vector<std::pair<std::string, Tensor>>& datasets,
                      std::size_t k = 2);

// dataset_label,pc1,pc2,... rows.
std::string pca_csv(const PcaResult& r);

}  // namespace ehrgan

#endif  // EHRGAN_PCA_H_
