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

// Fidelity, utility and sub-population reports, as JSON and aligned text.

#ifndef EHRGAN_REPORT_H_
#define EHRGAN_REPORT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehrgan/metrics.h"
#include "ehrgan/schema.h"
#include "ehrgan/table.h"
#include "ehrgan/tensor.h"
#include "json.hpp"

namespace ehrgan {

struct FidelityReport {
  std::optional<double> bernoulli;
  std::optional<double> categorical;
  CategorySumCheck category_sums;            // argmax assignment
  CategorySumCheck category_sums_threshold;  // threshold diagnostic
  double frobenius = 0.0;
  std::size_t frobenius_rows = 0;
};

// Frobenius uses `frobenius_rows` seeded rows from each matrix (fewer if
// either is smaller).
FidelityReport evaluate_fidelity(const Tensor& real, const Tensor& synth, const Schema& schema,
                                 std::uint64_t seed, std::size_t frobenius_rows = 1000);

struct UtilityMetrics {
  std::optional<double> auroc;  // absent when only one class is present
  std::optional<double> auprc;
  double accuracy = 0.0;
  std::size_t rows = 0;
};
UtilityMetrics utility_metrics(std::span<const double> scores, std::span<const int> labels);

struct UtilityReport {
  std::optional<Interval> auroc;
  std::optional<Interval> auprc;
  Interval accuracy;
};
// Summary over repetitions.
UtilityReport summarize_utility(std::span<const UtilityMetrics> runs);

// Rows of the real test table matching every predicate.
struct SliceSpec {
  std::string name;
  std::vector<RowPredicate> predicates;
};
// female / male by a 0/1 column; ages 0-18, 19-50, 51+ (boundaries go to the
// younger group).
std::vector<SliceSpec> default_slices(const std::string& female_column = "female",
                                      const std::string& age_column = "age");

struct SliceResult {
  std::string name;
  std::size_t rows = 0;
  std::optional<UtilityMetrics> metrics;  // absent for an empty slice
};
std::vector<SliceResult> slice_metrics(std::span<const double> scores, std::span<const int> labels,
                                       const Table& test, std::span<const SliceSpec> slices);

nlohmann::json to_json(const FidelityReport& r);
nlohmann::json to_json(const UtilityMetrics& m);
nlohmann::json to_json(const Interval& i);
nlohmann::json to_json(const UtilityReport& r);
nlohmann::json to_json(const SliceResult& s);

std::string fidelity_text(const FidelityReport& r);
// `rows`: label and report per row (e.g. baseline / synthetic).
std::string utility_text(const std::vector<std::pair<std::string, UtilityReport>>& rows);
std::string slices_text(const std::vector<std::pair<std::string, std::vector<UtilityReport>>>& rows,
                        const std::vector<std::string>& slice_names);

}  // namespace ehrgan

#endif  // EHRGAN_REPORT_H_
