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

#include "ehrgan/pca.h"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "ehrgan/encoding.h"
#include "ehrgan/errors.h"

namespace ehrgan {

PcaResult pca_project(const std::vector<std::pair<std::string, Tensor>>& datasets,
                      std::size_t k) {
  if (datasets.empty()) throw ContractError("pca_project: no datasets");
  const std::size_t d = datasets.front().second.cols();
  std::size_t n = 0;
  for (const auto& [label, m] : datasets) {
    if (m.cols() != d) throw DimensionError("pca_project: datasets differ in width");
    n += m.rows();
  }
  const std::size_t rank = std::min(n, d);
  if (k < 1 || k > rank) {
    throw ContractError("pca_project: k = " + std::to_string(k) + " exceeds the achievable rank " +
                        std::to_string(rank));
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (const auto& [label, m] : datasets) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      mean += Eigen::Map<const Eigen::VectorXd>(m.row(r).data(), static_cast<Eigen::Index>(d));
    }
  }
  mean /= static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& [label, m] : datasets) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const Eigen::VectorXd c =
          Eigen::Map<const Eigen::VectorXd>(m.row(r).data(), static_cast<Eigen::Index>(d)) - mean;
      cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n > 1 ? n - 1 : 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca_project: eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  PcaResult out;
  out.mean = Tensor(1, d, std::vector<double>(mean.data(), mean.data() + d));
  out.components = Tensor(k, d);
  for (Eigen::Index i = values.size() - 1; i >= 0; --i) out.eigenvalues.push_back(values(i));
  for (std::size_t c = 0; c < k; ++c) {
    const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - c);
    Eigen::VectorXd v = vectors.col(col);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (std::size_t j = 0; j < d; ++j) out.components(c, j) = v(static_cast<Eigen::Index>(j));
    out.explained.push_back(std::max(0.0, values(col)));
  }
  for (const auto& [label, m] : datasets) {
    Tensor proj(m.rows(), k);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += (m(r, j) - out.mean[j]) * out.components(c, j);
        proj(r, c) = s;
      }
    }
    out.labels.push_back(label);
    out.projections.push_back(std::move(proj));
  }
  return out;
}

std::string pca_csv(const PcaResult& r) {
  std::ostringstream os;
  os << "dataset_label";
  const std::size_t k = r.components.rows();
  for (std::size_t c = 0; c < k; ++c) os << ",pc" << (c + 1);
  os << "\n";
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    const Tensor& p = r.projections[i];
    for (std::size_t row = 0; row < p.rows(); ++row) {
      os << r.labels[i];
      for (std::size_t c = 0; c < k; ++c) os << ',' << format_double(p(row, c));
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace ehrgan
