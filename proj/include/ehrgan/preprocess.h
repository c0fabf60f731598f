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

// Row-level preprocessing: filtering, the train/test split, label balancing,
// derived (ICD-grouped) features and GMM fitting.

#ifndef EHRGAN_PREPROCESS_H_
#define EHRGAN_PREPROCESS_H_

#include <cstdint>
#include <string_view>
#include <utility>

#include "ehrgan/schema.h"
#include "ehrgan/table.h"

namespace ehrgan {

// Keeps rows matching every schema filter.
Table apply_filters(const Table& raw, const Schema& schema);

// {train, test}: rows matching `schema.test_split` go to test. Without a
// split predicate everything is training data.
std::pair<Table, Table> split_train_test(const Table& table, const Schema& schema);

// Undersamples the majority class uniformly (seeded) so both classes of the
// binary `label_column` have equal counts. Surviving rows keep their order.
Table balance_by_label(const Table& table, std::string_view label_column, std::uint64_t seed);

// Builds the feature table: one column per schema feature, in schema order,
// applying ICD transforms to their source columns.
Table derive_features(const Table& raw, const Schema& schema);

// Returns a copy of `schema` with a GMM fitted to every continuous feature.
Schema fit_schema(const Table& features, Schema schema, std::uint64_t seed);

}  // namespace ehrgan

#endif  // EHRGAN_PREPROCESS_H_
