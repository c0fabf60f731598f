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

// Declarative description of a heterogeneous table: feature kinds, category
// vocabularies, GMM settings, derived ICD features, row filters and the
// train/test split predicate. Serialized as JSON.

#ifndef EHRGAN_SCHEMA_H_
#define EHRGAN_SCHEMA_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ehrgan/gmm.h"
#include "json.hpp"

namespace ehrgan {

enum class FeatureKind { kBernoulli, kCategorical, kContinuous };

// How a feature is computed from a raw column.
enum class Transform {
  kNone,           // copy of the source column
  kIcdMain,        // categorical: letter of a single diagnosis code
  kIcdAdditional,  // bernoulli: any code in the cell falls in `group` (e.g. "A1")
  kIcdProcedure,   // bernoulli: any code in the cell falls in `group` (e.g. "470")
};

std::string to_string(FeatureKind k);
std::string to_string(Transform t);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kBernoulli;
  std::vector<std::string> categories;  // categorical only
  int modes = 5;                        // continuous only
  bool is_count = false;                // continuous: round to a non-negative integer on decode
  bool is_label = false;
  std::optional<GmmModel> gmm;          // continuous, once fitted
  std::string source;                   // raw column; empty means `name`
  Transform transform = Transform::kNone;
  std::string group;                    // ICD group for indicator transforms

  // 1 for bernoulli, K for categorical, M + 1 for continuous.
  std::size_t encoded_width() const;
  const std::string& source_column() const { return source.empty() ? name : source; }
  std::size_t category_index(std::string_view value) const;  // throws SchemaError
};

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

// `column <op> value`. Compares numerically when both sides parse as numbers,
// otherwise as strings.
struct RowPredicate {
  std::string column;
  CompareOp op = CompareOp::kEq;
  std::string value;

  bool matches(std::string_view cell) const;
};

struct Schema {
  std::vector<FeatureSpec> features;
  std::vector<RowPredicate> filters;      // keep rows matching all of these
  std::optional<RowPredicate> test_split;  // rows matching go to the test set

  std::size_t encoded_width() const;
  // Column offset of each feature's block in the encoded matrix.
  std::vector<std::size_t> offsets() const;
  std::size_t label_index() const;
  const FeatureSpec& label() const { return features[label_index()]; }
  std::optional<std::size_t> find(std::string_view name) const;
  bool fitted() const;
  // Throws SchemaError / ConfigError on any structural problem.
  void validate() const;
};

nlohmann::json to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& j);
Schema load_schema(const std::filesystem::path& path);
void save_schema(const Schema& schema, const std::filesystem::path& path);

nlohmann::json to_json(const GmmModel& g);
GmmModel gmm_from_json(const nlohmann::json& j);

bool parse_double(std::string_view s, double& out);

}  // namespace ehrgan

#endif  // EHRGAN_SCHEMA_H_
