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

// Seeded synthetic admissions table with a known generative process, used as
// a stand-in for real records. The raw table has ICD code columns, so the
// full preprocessing path (filters, ICD grouping, year split) is exercised.

#ifndef EHRGAN_REFERENCE_DATA_H_
#define EHRGAN_REFERENCE_DATA_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ehrgan/schema.h"
#include "ehrgan/table.h"
#include "json.hpp"

namespace ehrgan {

struct MixtureGenerator {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stddevs;
  double min = 0.0;  // draws are clamped and rounded
  double max = 1e9;
};

struct CategoricalGenerator {
  std::string name;
  std::vector<std::string> categories;
  std::vector<double> probs;
};

// Indicator feature backed by ICD codes: present with probability `p`, in
// which case one code from the group is written to the cell.
struct CodeGroupGenerator {
  std::string group;
  double p = 0.0;
};

struct ReferenceDataSpec {
  std::size_t rows = 20000;
  std::vector<int> years = {2012, 2013, 2014, 2015, 2016, 2017};  // last is the test year
  double death_rate = 0.02;
  double female_p = 0.52;
  std::vector<CodeGroupGenerator> additional_dx;  // 8 groups, "letter digit"
  CodeGroupGenerator procedure;                   // 3-character group
  CategoricalGenerator main_dx;                   // categories are ICD chapter letters
  std::vector<CategoricalGenerator> categoricals;
  MixtureGenerator age;
  MixtureGenerator length_of_stay;
  // Label: P(returning) = sigmoid(intercept + sum coef * x). Keys name a
  // feature (bernoulli 0/1 or continuous raw value) or "feature=category".
  double intercept = 0.0;
  std::map<std::string, double> coefficients;

  static ReferenceDataSpec defaults();
  void validate() const;
};

nlohmann::json to_json(const ReferenceDataSpec& s);
ReferenceDataSpec reference_spec_from_json(const nlohmann::json& j);

struct ReferenceData {
  Table raw;
  Schema schema;  // unfitted template describing `raw`
  nlohmann::json ground_truth;
};

ReferenceData make_reference_data(const ReferenceDataSpec& spec, std::uint64_t seed);

}  // namespace ehrgan

#endif  // EHRGAN_REFERENCE_DATA_H_
