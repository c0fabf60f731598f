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

// Random fitted schemas and matching feature tables for round-trip checks.

#ifndef EHRGAN_TESTS_RANDOM_TABLES_H_
#define EHRGAN_TESTS_RANDOM_TABLES_H_

#include <cmath>
#include <string>
#include <vector>

#include "ehrgan/encoding.h"
#include "ehrgan/rng.h"
#include "ehrgan/schema.h"
#include "ehrgan/table.h"

namespace ehrgan::oracle {

inline GmmModel random_gmm(int modes, Rng& rng) {
  GmmModel g;
  double total = 0.0;
  for (int m = 0; m < modes; ++m) {
    g.weights.push_back(uniform(rng, 0.1, 1.0));
    total += g.weights.back();
    g.means.push_back(uniform(rng, -50.0, 50.0));
    g.stddevs.push_back(uniform(rng, 0.2, 6.0));
  }
  for (double& w : g.weights) w /= total;
  double fix = 1.0;
  for (int m = 1; m < modes; ++m) fix -= g.weights[m];
  g.weights[0] = fix;
  return g;
}

// 1..6 non-label features of random kinds plus a bernoulli label, with
// fitted mixtures on every continuous feature.
inline Schema random_schema(Rng& rng) {
  Schema s;
  const std::size_t n = 1 + uniform_index(rng, 6);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureSpec f;
    f.name = "f" + std::to_string(i);
    switch (uniform_index(rng, 3)) {
      case 0: f.kind = FeatureKind::kBernoulli; break;
      case 1: {
        f.kind = FeatureKind::kCategorical;
        const std::size_t k = 2 + uniform_index(rng, 4);
        for (std::size_t c = 0; c < k; ++c) f.categories.push_back("c" + std::to_string(c));
        break;
      }
      default:
        f.kind = FeatureKind::kContinuous;
        f.modes = 1 + static_cast<int>(uniform_index(rng, 4));
        f.gmm = random_gmm(f.modes, rng);
    }
    s.features.push_back(f);
  }
  FeatureSpec label;
  label.name = "label";
  label.is_label = true;
  s.features.insert(s.features.begin() + uniform_index(rng, n + 1), label);
  s.validate();
  return s;
}

// Continuous values are drawn from the feature's own mixture.
inline Table random_table(const Schema& s, std::size_t rows, Rng& rng) {
  Table t;
  for (const auto& f : s.features) t.columns.push_back(f.name);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> row;
    for (const auto& f : s.features) {
      switch (f.kind) {
        case FeatureKind::kBernoulli: row.push_back(uniform01(rng) < 0.5 ? "0" : "1"); break;
        case FeatureKind::kCategorical:
          row.push_back(f.categories[uniform_index(rng, f.categories.size())]);
          break;
        case FeatureKind::kContinuous: {
          const GmmModel& g = *f.gmm;
          double u = uniform01(rng);
          std::size_t m = 0;
          while (m + 1 < g.modes() && u > g.weights[m]) u -= g.weights[m++];
          row.push_back(format_double(g.means[m] + g.stddevs[m] * 2.5 * normal(rng)));
          break;
        }
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct RoundTrip {
  std::size_t discrete_mismatches = 0;
  std::size_t continuous_checked = 0;
  double continuous_max_error = 0.0;
};

// decode(encode(t)) against t. Continuous cells are compared when the value
// lies within 4 sigma of the mode the encoder chose.
inline RoundTrip round_trip(const Table& t, const Schema& s, std::uint64_t seed) {
  const Tensor enc = encode_table(t, s, seed);
  const Table back = decode_matrix(enc, s);
  const auto offsets = s.offsets();
  RoundTrip out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (std::size_t c = 0; c < s.features.size(); ++c) {
      const auto& f = s.features[c];
      if (f.kind != FeatureKind::kContinuous) {
        if (t.rows[r][c] != back.rows[r][c]) ++out.discrete_mismatches;
        continue;
      }
      std::size_t m = 0;
      for (std::size_t j = 0; j < f.gmm->modes(); ++j) {
        if (enc(r, offsets[c] + j) == 1.0) m = j;
      }
      const double v = std::stod(t.rows[r][c]);
      if (std::abs(v - f.gmm->means[m]) > 4.0 * f.gmm->stddevs[m]) continue;
      ++out.continuous_checked;
      out.continuous_max_error =
          std::max(out.continuous_max_error, std::abs(std::stod(back.rows[r][c]) - v));
    }
  }
  return out;
}

}  // namespace ehrgan::oracle

#endif  // EHRGAN_TESTS_RANDOM_TABLES_H_
