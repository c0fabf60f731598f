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

#include "ehrgan/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ehrgan/errors.h"
#include "ehrgan/rng.h"

namespace ehrgan {
namespace {

void check_width(const Tensor& m, const Schema& schema) {
  if (m.cols() != schema.encoded_width()) {
    throw DimensionError("matrix has " + std::to_string(m.cols()) + " columns, schema expects " +
                         std::to_string(schema.encoded_width()));
  }
}

void check_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("scores and labels differ in length");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ContractError("labels must be 0 or 1");
  }
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels) {
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  return {pos, labels.size() - pos};
}

// Indices ordered by descending score.
std::vector<std::size_t> order_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

double mean_abs_gap(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

DiscreteMarginals discrete_marginals(const Tensor& encoded, const Schema& schema,
                                     Assignment assignment) {
  check_width(encoded, schema);
  if (encoded.rows() == 0) throw ContractError("discrete_marginals: empty matrix");
  const std::vector<std::size_t> offsets = schema.offsets();
  const auto n = static_cast<double>(encoded.rows());
  DiscreteMarginals out;
  for (std::size_t f = 0; f < schema.features.size(); ++f) {
    const FeatureSpec& spec = schema.features[f];
    const std::size_t off = offsets[f];
    if (spec.kind == FeatureKind::kBernoulli) {
      std::size_t ones = 0;
      for (std::size_t r = 0; r < encoded.rows(); ++r) ones += encoded(r, off) >= 0.5;
      out.bernoulli.push_back(static_cast<double>(ones) / n);
    } else if (spec.kind == FeatureKind::kCategorical) {
      const std::size_t k = spec.categories.size();
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t r = 0; r < encoded.rows(); ++r) {
        auto block = encoded.row(r).subspan(off, k);
        if (assignment == Assignment::kArgmax) {
          ++counts[std::max_element(block.begin(), block.end()) - block.begin()];
        } else {
          for (std::size_t c = 0; c < k; ++c) counts[c] += block[c] >= 0.5;
        }
      }
      std::vector<double> p(k);
      for (std::size_t c = 0; c < k; ++c) p[c] = static_cast<double>(counts[c]) / n;
      out.categorical.push_back(std::move(p));
    }
  }
  return out;
}

std::optional<double> bernoulli_divergence(const Tensor& real, const Tensor& synth,
                                           const Schema& schema) {
  const DiscreteMarginals r = discrete_marginals(real, schema);
  const DiscreteMarginals s = discrete_marginals(synth, schema);
  if (r.bernoulli.empty()) return std::nullopt;
  return mean_abs_gap(r.bernoulli, s.bernoulli);
}

std::optional<double> categorical_divergence(const Tensor& real, const Tensor& synth,
                                             const Schema& schema) {
  const DiscreteMarginals r = discrete_marginals(real, schema);
  const DiscreteMarginals s = discrete_marginals(synth, schema);
  std::vector<double> pr, ps;
  for (std::size_t f = 0; f < r.categorical.size(); ++f) {
    pr.insert(pr.end(), r.categorical[f].begin(), r.categorical[f].end());
    ps.insert(ps.end(), s.categorical[f].begin(), s.categorical[f].end());
  }
  if (pr.empty()) return std::nullopt;
  return mean_abs_gap(pr, ps);
}

CategorySumCheck category_sum_check(const Tensor& synth, const Schema& schema,
                                    Assignment assignment) {
  const DiscreteMarginals m = discrete_marginals(synth, schema, assignment);
  const auto n = static_cast<double>(synth.rows());
  CategorySumCheck out;
  std::size_t c = 0;
  for (const auto& f : schema.features) {
    if (f.kind != FeatureKind::kCategorical) continue;
    out.features.push_back(f.name);
    const auto& p = m.categorical[c++];
    // Sum the recovered counts so an exact partition gives exactly 1.
    long long total = 0;
    for (double v : p) total += std::llround(v * n);
    out.sums.push_back(static_cast<double>(total) / n);
  }
  if (out.sums.empty()) throw SchemaError("category_sum_check: schema has no categorical features");
  double dev = 0.0;
  for (double s : out.sums) dev += std::abs(s - 1.0);
  out.mean_deviation = dev / static_cast<double>(out.sums.size());
  return out;
}

double frobenius_divergence(const Tensor& real, const Tensor& synth) {
  if (real.rows() != synth.rows()) {
    throw ContractError("frobenius_divergence: row counts differ (" + std::to_string(real.rows()) +
                        " vs " + std::to_string(synth.rows()) + ")");
  }
  if (real.cols() != synth.cols()) throw DimensionError("frobenius_divergence: widths differ");
  return std::abs(std::sqrt(squared_norm(real)) - std::sqrt(squared_norm(synth)));
}

Tensor sample_rows(const Tensor& m, std::size_t n, std::uint64_t seed) {
  if (n >= m.rows()) return m;
  std::vector<std::size_t> idx(m.rows());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + uniform_index(rng, m.rows() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  Tensor out(n, m.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto src = m.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_binary(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw MetricUndefinedError("AUROC needs both classes");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U, in integers: each positive scores 2 per lower
  // negative and 1 per tied negative.
  unsigned long long twice_u = 0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t p = 0, q = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? p : q) += 1;
      ++j;
    }
    twice_u += 2ULL * p * neg_below + static_cast<unsigned long long>(p) * q;
    neg_below += q;
    i = j;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_binary(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw MetricUndefinedError("AUPRC needs both classes");
  const std::vector<std::size_t> idx = order_desc(scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      tp += labels[idx[j]] == 1;
      ++seen;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_binary(scores, labels);
  if (scores.empty()) throw MetricUndefinedError("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    correct += static_cast<int>(scores[i] >= threshold) == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

Interval confidence_interval(std::span<const double> values) {
  if (values.empty()) throw ContractError("confidence interval of no values");
  Interval ci;
  ci.values.assign(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
    ci.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return ci;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("spearman: sizes differ");
  if (x.size() < 2) throw MetricUndefinedError("spearman: fewer than two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw MetricUndefinedError("spearman: constant input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ehrgan
