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

#include "ehrgan/encoding.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>

#include "ehrgan/errors.h"

namespace ehrgan {
namespace {

double parse_bernoulli(const std::string& cell, const FeatureSpec& f) {
  double v;
  if (!parse_double(cell, v) || (v != 0.0 && v != 1.0)) {
    throw SchemaError("feature '" + f.name + "': bernoulli value must be 0 or 1, got '" +
                      cell + "'");
  }
  return v;
}

double parse_continuous(const std::string& cell, const FeatureSpec& f) {
  double v;
  if (!parse_double(cell, v) || !std::isfinite(v)) {
    throw SchemaError("feature '" + f.name + "': non-numeric value '" + cell + "'");
  }
  return v;
}

std::size_t argmax(std::span<const double> block) {
  return static_cast<std::size_t>(std::max_element(block.begin(), block.end()) - block.begin());
}

// Typed view of one feature column, validated before any parallel work.
struct ParsedColumn {
  std::vector<double> values;  // bernoulli / continuous
  std::vector<std::size_t> index;  // categorical
};

std::vector<ParsedColumn> parse_columns(const Table& features, const Schema& schema) {
  std::vector<ParsedColumn> cols(schema.features.size());
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    const FeatureSpec& f = schema.features[i];
    const std::size_t c = features.column_index(f.name);
    ParsedColumn& pc = cols[i];
    for (const auto& row : features.rows) {
      switch (f.kind) {
        case FeatureKind::kBernoulli: pc.values.push_back(parse_bernoulli(row[c], f)); break;
        case FeatureKind::kCategorical: pc.index.push_back(f.category_index(row[c])); break;
        case FeatureKind::kContinuous: pc.values.push_back(parse_continuous(row[c], f)); break;
      }
    }
  }
  return cols;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double mode_scalar(double v, const GmmModel& model, std::size_t mode) {
  const double s = std::clamp((v - model.means[mode]) / (4.0 * model.stddevs[mode]), -1.0, 1.0);
  return (s + 1.0) / 2.0;
}

ContinuousCode encode_continuous(double v, const GmmModel& model, Rng& rng) {
  const std::vector<double> r = model.responsibilities(v);
  double u = uniform01(rng);
  std::size_t mode = r.size() - 1;
  for (std::size_t m = 0; m < r.size(); ++m) {
    if (u < r[m]) {
      mode = m;
      break;
    }
    u -= r[m];
  }
  // Rounding can leave u past the last positive responsibility.
  while (r[mode] == 0.0 && mode > 0) --mode;
  return {mode, mode_scalar(v, model, mode)};
}

double decode_continuous(std::span<const double> mode_block, double scalar,
                         const GmmModel& model) {
  if (mode_block.size() != model.modes()) {
    throw DimensionError("decode_continuous: mode block width " +
                         std::to_string(mode_block.size()) + " for " +
                         std::to_string(model.modes()) + " modes");
  }
  const std::size_t m = argmax(mode_block);
  const double s = std::clamp(scalar, 0.0, 1.0);
  return (2.0 * s - 1.0) * 4.0 * model.stddevs[m] + model.means[m];
}

Tensor encode_table(const Table& features, const Schema& schema, std::uint64_t seed) {
  if (!schema.fitted()) throw SchemaError("encode_table: schema has unfitted continuous features");
  const std::vector<ParsedColumn> cols = parse_columns(features, schema);
  const std::vector<std::size_t> offsets = schema.offsets();
  const std::size_t width = schema.encoded_width();
  const auto n = static_cast<std::int64_t>(features.size());
  Tensor out(features.size(), width);

#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    double* row = out.data() + r * width;
    for (std::size_t i = 0; i < schema.features.size(); ++i) {
      const FeatureSpec& f = schema.features[i];
      double* block = row + offsets[i];
      switch (f.kind) {
        case FeatureKind::kBernoulli:
          block[0] = cols[i].values[r];
          break;
        case FeatureKind::kCategorical:
          block[cols[i].index[r]] = 1.0;
          break;
        case FeatureKind::kContinuous: {
          const ContinuousCode code = encode_continuous(cols[i].values[r], *f.gmm, rng);
          block[code.mode] = 1.0;
          block[f.modes] = code.scalar;
          break;
        }
      }
    }
  }
  return out;
}

Table decode_matrix(const Tensor& matrix, const Schema& schema) {
  if (matrix.cols() != schema.encoded_width()) {
    throw DimensionError("decode_matrix: matrix has " + std::to_string(matrix.cols()) +
                         " columns, schema expects " + std::to_string(schema.encoded_width()));
  }
  if (!schema.fitted()) throw SchemaError("decode_matrix: schema has unfitted continuous features");
  const std::vector<std::size_t> offsets = schema.offsets();
  Table out;
  for (const auto& f : schema.features) out.columns.push_back(f.name);
  out.rows.resize(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    auto row = matrix.row(r);
    std::vector<std::string>& cells = out.rows[r];
    cells.reserve(schema.features.size());
    for (std::size_t i = 0; i < schema.features.size(); ++i) {
      const FeatureSpec& f = schema.features[i];
      auto block = row.subspan(offsets[i], f.encoded_width());
      switch (f.kind) {
        case FeatureKind::kBernoulli:
          cells.push_back(block[0] >= 0.5 ? "1" : "0");
          break;
        case FeatureKind::kCategorical:
          cells.push_back(f.categories[argmax(block)]);
          break;
        case FeatureKind::kContinuous: {
          const double v = decode_continuous(block.first(f.modes), block[f.modes], *f.gmm);
          if (f.is_count) {
            cells.push_back(std::to_string(std::max<long long>(0, std::llround(v))));
          } else {
            cells.push_back(format_double(v));
          }
          break;
        }
      }
    }
  }
  return out;
}

std::size_t featurized_width(const Schema& schema) {
  std::size_t w = 0;
  for (const auto& f : schema.features) {
    if (f.is_label) continue;
    w += f.kind == FeatureKind::kCategorical ? f.categories.size() : 1;
  }
  return w;
}

FeatureMatrix featurize(const Table& features, const Schema& schema) {
  if (!schema.fitted()) throw SchemaError("featurize: schema has unfitted continuous features");
  const std::vector<ParsedColumn> cols = parse_columns(features, schema);
  const std::size_t width = featurized_width(schema);
  FeatureMatrix fm{Tensor(features.size(), width), std::vector<int>(features.size())};
  const std::size_t label = schema.label_index();
  for (std::size_t r = 0; r < features.size(); ++r) {
    double* row = fm.x.data() + r * width;
    std::size_t off = 0;
    for (std::size_t i = 0; i < schema.features.size(); ++i) {
      const FeatureSpec& f = schema.features[i];
      if (i == label) {
        fm.labels[r] = static_cast<int>(cols[i].values[r]);
        continue;
      }
      switch (f.kind) {
        case FeatureKind::kBernoulli:
          row[off++] = cols[i].values[r];
          break;
        case FeatureKind::kCategorical:
          row[off + cols[i].index[r]] = 1.0;
          off += f.categories.size();
          break;
        case FeatureKind::kContinuous: {
          const double sd = std::max(f.gmm->mixture_stddev(), kSigmaFloor);
          row[off++] = (cols[i].values[r] - f.gmm->mixture_mean()) / sd;
          break;
        }
      }
    }
  }
  return fm;
}

}  // namespace ehrgan
