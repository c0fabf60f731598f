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

#include "ehrgan/report.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "ehrgan/errors.h"
#include "ehrgan/rng.h"

namespace ehrgan {
namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string cell(const std::optional<Interval>& i) {
  if (!i) return "n/a";
  return fixed(i->mean, 4) + " +- " + fixed(i->half_width, 4);
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

FidelityReport evaluate_fidelity(const Tensor& real, const Tensor& synth, const Schema& schema,
                                 std::uint64_t seed, std::size_t frobenius_rows) {
  FidelityReport r;
  r.bernoulli = bernoulli_divergence(real, synth, schema);
  r.categorical = categorical_divergence(real, synth, schema);
  bool has_categorical = false;
  for (const auto& f : schema.features) has_categorical |= f.kind == FeatureKind::kCategorical;
  if (has_categorical) {
    r.category_sums = category_sum_check(synth, schema, Assignment::kArgmax);
    r.category_sums_threshold = category_sum_check(synth, schema, Assignment::kThreshold);
  }
  const std::size_t n = std::min({frobenius_rows, real.rows(), synth.rows()});
  r.frobenius_rows = n;
  // One index draw for both sides: a copy of the real data scores exactly 0.
  const std::uint64_t draw = derive_seed(seed, "frobenius");
  r.frobenius = frobenius_divergence(sample_rows(real, n, draw), sample_rows(synth, n, draw));
  return r;
}

UtilityMetrics utility_metrics(std::span<const double> scores, std::span<const int> labels) {
  UtilityMetrics m;
  m.rows = scores.size();
  m.accuracy = accuracy(scores, labels);
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos > 0 && pos < static_cast<long>(labels.size())) {
    m.auroc = auroc(scores, labels);
    m.auprc = auprc(scores, labels);
  }
  return m;
}

UtilityReport summarize_utility(std::span<const UtilityMetrics> runs) {
  if (runs.empty()) throw ContractError("summarize_utility: no runs");
  std::vector<double> roc, prc, acc;
  for (const auto& r : runs) {
    if (r.auroc) roc.push_back(*r.auroc);
    if (r.auprc) prc.push_back(*r.auprc);
    acc.push_back(r.accuracy);
  }
  UtilityReport out;
  if (roc.size() == runs.size()) out.auroc = confidence_interval(roc);
  if (prc.size() == runs.size()) out.auprc = confidence_interval(prc);
  out.accuracy = confidence_interval(acc);
  return out;
}

std::vector<SliceSpec> default_slices(const std::string& female_column,
                                      const std::string& age_column) {
  return {
      {"female", {{female_column, CompareOp::kEq, "1"}}},
      {"male", {{female_column, CompareOp::kEq, "0"}}},
      {"age_0_18", {{age_column, CompareOp::kLe, "18"}}},
      {"age_19_50", {{age_column, CompareOp::kGt, "18"}, {age_column, CompareOp::kLe, "50"}}},
      {"age_51_plus", {{age_column, CompareOp::kGt, "50"}}},
  };
}

std::vector<SliceResult> slice_metrics(std::span<const double> scores, std::span<const int> labels,
                                       const Table& test, std::span<const SliceSpec> slices) {
  if (scores.size() != test.size() || labels.size() != test.size()) {
    throw DimensionError("slice_metrics: scores, labels and table differ in length");
  }
  std::vector<SliceResult> out;
  for (const SliceSpec& s : slices) {
    std::vector<std::size_t> cols;
    for (const auto& p : s.predicates) cols.push_back(test.column_index(p.column));
    std::vector<double> ss;
    std::vector<int> ls;
    for (std::size_t r = 0; r < test.size(); ++r) {
      bool in = true;
      for (std::size_t i = 0; i < cols.size() && in; ++i) {
        in = s.predicates[i].matches(test.rows[r][cols[i]]);
      }
      if (in) {
        ss.push_back(scores[r]);
        ls.push_back(labels[r]);
      }
    }
    SliceResult res{s.name, ss.size(), std::nullopt};
    if (!ss.empty()) res.metrics = utility_metrics(ss, ls);
    out.push_back(std::move(res));
  }
  return out;
}

nlohmann::json to_json(const FidelityReport& r) {
  nlohmann::json sums = nlohmann::json::object();
  for (std::size_t i = 0; i < r.category_sums.features.size(); ++i) {
    sums[r.category_sums.features[i]] = r.category_sums.sums[i];
  }
  nlohmann::json tsums = nlohmann::json::object();
  for (std::size_t i = 0; i < r.category_sums_threshold.features.size(); ++i) {
    tsums[r.category_sums_threshold.features[i]] = r.category_sums_threshold.sums[i];
  }
  return {{"bernoulli_divergence", opt(r.bernoulli)},
          {"categorical_divergence", opt(r.categorical)},
          {"category_sums", sums},
          {"category_sum_mean_deviation", r.category_sums.mean_deviation},
          {"category_sums_threshold", tsums},
          {"category_sum_mean_deviation_threshold", r.category_sums_threshold.mean_deviation},
          {"frobenius_divergence", r.frobenius},
          {"frobenius_rows", r.frobenius_rows}};
}

nlohmann::json to_json(const UtilityMetrics& m) {
  return {{"auroc", opt(m.auroc)}, {"auprc", opt(m.auprc)}, {"accuracy", m.accuracy},
          {"rows", m.rows}};
}

nlohmann::json to_json(const Interval& i) {
  return {{"mean", i.mean}, {"ci95", i.half_width}, {"values", i.values}};
}

nlohmann::json to_json(const UtilityReport& r) {
  return {{"auroc", r.auroc ? to_json(*r.auroc) : nlohmann::json(nullptr)},
          {"auprc", r.auprc ? to_json(*r.auprc) : nlohmann::json(nullptr)},
          {"accuracy", to_json(r.accuracy)}};
}

nlohmann::json to_json(const SliceResult& s) {
  return {{"slice", s.name},
          {"rows", s.rows},
          {"metrics", s.metrics ? to_json(*s.metrics) : nlohmann::json(nullptr)}};
}

std::string fidelity_text(const FidelityReport& r) {
  std::ostringstream os;
  auto line = [&](const std::string& k, const std::string& v) { os << pad(k, 40) << v << "\n"; };
  line("bernoulli divergence", r.bernoulli ? fixed(*r.bernoulli, 8) : "absent");
  line("categorical divergence", r.categorical ? fixed(*r.categorical, 8) : "absent");
  line("category sum deviation (argmax)", fixed(r.category_sums.mean_deviation, 8));
  line("category sum deviation (threshold)", fixed(r.category_sums_threshold.mean_deviation, 8));
  line("frobenius divergence (" + std::to_string(r.frobenius_rows) + " rows)", fixed(r.frobenius, 6));
  return os.str();
}

std::string utility_text(const std::vector<std::pair<std::string, UtilityReport>>& rows) {
  std::ostringstream os;
  os << pad("data", 24) << pad("AUROC", 22) << pad("AUPRC", 22) << "accuracy\n";
  for (const auto& [label, r] : rows) {
    os << pad(label, 24) << pad(cell(r.auroc), 22) << pad(cell(r.auprc), 22)
       << cell(std::optional<Interval>(r.accuracy)) << "\n";
  }
  return os.str();
}

std::string slices_text(const std::vector<std::pair<std::string, std::vector<UtilityReport>>>& rows,
                        const std::vector<std::string>& slice_names) {
  std::ostringstream os;
  os << pad("data", 24) << pad("slice", 14) << pad("AUROC", 22) << pad("AUPRC", 22)
     << "accuracy\n";
  for (const auto& [label, reports] : rows) {
    for (std::size_t i = 0; i < reports.size() && i < slice_names.size(); ++i) {
      os << pad(label, 24) << pad(slice_names[i], 14) << pad(cell(reports[i].auroc), 22)
         << pad(cell(reports[i].auprc), 22)
         << cell(std::optional<Interval>(reports[i].accuracy)) << "\n";
    }
  }
  return os.str();
}

}  // namespace ehrgan
