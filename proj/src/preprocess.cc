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

#include "ehrgan/preprocess.h"

#include <algorithm>
#include <set>

#include "ehrgan/errors.h"
#include "ehrgan/icd.h"
#include "ehrgan/rng.h"

namespace ehrgan {

Table apply_filters(const Table& raw, const Schema& schema) {
  std::vector<std::size_t> cols;
  for (const auto& f : schema.filters) cols.push_back(raw.column_index(f.column));
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < raw.size(); ++r) {
    bool ok = true;
    for (std::size_t i = 0; i < cols.size() && ok; ++i) {
      ok = schema.filters[i].matches(raw.rows[r][cols[i]]);
    }
    if (ok) keep.push_back(r);
  }
  return raw.select_rows(keep);
}

std::pair<Table, Table> split_train_test(const Table& table, const Schema& schema) {
  if (!schema.test_split) {
    Table empty;
    empty.columns = table.columns;
    return {table, empty};
  }
  const std::size_t c = table.column_index(schema.test_split->column);
  std::vector<std::size_t> train, test;
  for (std::size_t r = 0; r < table.size(); ++r) {
    (schema.test_split->matches(table.rows[r][c]) ? test : train).push_back(r);
  }
  return {table.select_rows(train), table.select_rows(test)};
}

Table balance_by_label(const Table& table, std::string_view label_column, std::uint64_t seed) {
  const std::size_t c = table.column_index(label_column);
  std::vector<std::size_t> pos, neg;
  for (std::size_t r = 0; r < table.size(); ++r) {
    double v;
    if (!parse_double(table.rows[r][c], v) || (v != 0.0 && v != 1.0)) {
      throw BalanceError("label column '" + std::string(label_column) +
                         "' is not binary at row " + std::to_string(r));
    }
    (v == 1.0 ? pos : neg).push_back(r);
  }
  if (pos.empty() || neg.empty()) {
    throw BalanceError("cannot balance: class " + std::string(pos.empty() ? "1" : "0") +
                       " has no rows");
  }
  std::vector<std::size_t>& major = pos.size() > neg.size() ? pos : neg;
  const std::vector<std::size_t>& minor = pos.size() > neg.size() ? neg : pos;
  // Partial Fisher-Yates: the first |minor| slots become a uniform subset.
  Rng rng(derive_seed(seed, "balance"));
  for (std::size_t i = 0; i < minor.size(); ++i) {
    const std::size_t j = i + uniform_index(rng, major.size() - i);
    std::swap(major[i], major[j]);
  }
  std::vector<std::size_t> keep(minor.begin(), minor.end());
  keep.insert(keep.end(), major.begin(), major.begin() + minor.size());
  std::sort(keep.begin(), keep.end());
  return table.select_rows(keep);
}

Table derive_features(const Table& raw, const Schema& schema) {
  Table out;
  std::vector<std::size_t> src;
  for (const auto& f : schema.features) {
    out.columns.push_back(f.name);
    src.push_back(raw.column_index(f.source_column()));
  }
  out.rows.reserve(raw.size());
  for (std::size_t r = 0; r < raw.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(schema.features.size());
    for (std::size_t i = 0; i < schema.features.size(); ++i) {
      const FeatureSpec& f = schema.features[i];
      const std::string& cell = raw.rows[r][src[i]];
      switch (f.transform) {
        case Transform::kNone:
          row.push_back(cell);
          break;
        case Transform::kIcdMain:
          row.push_back(icd::group_main(cell));
          break;
        case Transform::kIcdAdditional:
        case Transform::kIcdProcedure: {
          bool hit = false;
          for (const std::string& code : icd::split_codes(cell)) {
            const std::string g = f.transform == Transform::kIcdAdditional
                                      ? icd::group_additional(code)
                                      : icd::group_procedure(code);
            if (g == f.group) {
              hit = true;
              break;
            }
          }
          row.push_back(hit ? "1" : "0");
          break;
        }
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

Schema fit_schema(const Table& features, Schema schema, std::uint64_t seed) {
  for (std::size_t i = 0; i < schema.features.size(); ++i) {
    FeatureSpec& f = schema.features[i];
    if (f.kind != FeatureKind::kContinuous) continue;
    const std::size_t c = features.column_index(f.name);
    std::vector<double> values;
    values.reserve(features.size());
    for (const auto& row : features.rows) {
      double v;
      if (!parse_double(row[c], v)) {
        throw SchemaError("feature '" + f.name + "': non-numeric value '" + row[c] + "'");
      }
      values.push_back(v);
    }
    f.gmm = fit_gmm(values, f.modes, derive_seed(seed, f.name));
  }
  schema.validate();
  return schema;
}

}  // namespace ehrgan
