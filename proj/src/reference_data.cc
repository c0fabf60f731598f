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

#include "ehrgan/reference_data.h"

#include <cmath>
#include <numeric>

#include "ehrgan/errors.h"
#include "ehrgan/rng.h"

namespace ehrgan {
namespace {

// Codes outside every modelled group, mixed into the code cells.
const std::vector<std::string> kNoiseDx = {"R10.4", "S72.0", "Z51.1", "L03.1", "H25.9"};
const std::vector<std::string> kNoiseProc = {"9251800", "3000200", "4770100"};

std::size_t draw_category(Rng& rng, const std::vector<double>& probs) {
  double u = uniform01(rng);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return probs.size() - 1;
}

double draw_mixture(Rng& rng, const MixtureGenerator& m) {
  const std::size_t k = draw_category(rng, m.weights);
  const double v = m.means[k] + m.stddevs[k] * normal(rng);
  return std::clamp(std::round(v), m.min, m.max);
}

void check_probs(const std::string& what, const std::vector<double>& p) {
  if (p.empty()) throw ConfigError(what + ": no probabilities");
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ConfigError(what + ": negative probability");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError(what + ": probabilities sum to " + std::to_string(s));
}

void check_mixture(const std::string& what, const MixtureGenerator& m) {
  check_probs(what, m.weights);
  if (m.means.size() != m.weights.size() || m.stddevs.size() != m.weights.size()) {
    throw ConfigError(what + ": mixture arrays differ in length");
  }
  for (double s : m.stddevs) {
    if (!(s > 0.0)) throw ConfigError(what + ": stddev must be positive");
  }
  if (!(m.min <= m.max)) throw ConfigError(what + ": min exceeds max");
}

nlohmann::json mixture_json(const MixtureGenerator& m) {
  return {{"weights", m.weights}, {"means", m.means}, {"stddevs", m.stddevs},
          {"min", m.min}, {"max", m.max}};
}

MixtureGenerator mixture_from(const nlohmann::json& j) {
  return {j.at("weights").get<std::vector<double>>(), j.at("means").get<std::vector<double>>(),
          j.at("stddevs").get<std::vector<double>>(), j.at("min").get<double>(),
          j.at("max").get<double>()};
}

nlohmann::json categorical_json(const CategoricalGenerator& c) {
  return {{"name", c.name}, {"categories", c.categories}, {"probs", c.probs}};
}

CategoricalGenerator categorical_from(const nlohmann::json& j) {
  return {j.at("name").get<std::string>(), j.at("categories").get<std::vector<std::string>>(),
          j.at("probs").get<std::vector<double>>()};
}

std::string dx_feature(const std::string& group) { return "dx_" + group; }
std::string proc_feature(const std::string& group) { return "proc_" + group; }

}  // namespace

ReferenceDataSpec ReferenceDataSpec::defaults() {
  ReferenceDataSpec s;
  s.additional_dx = {{"I1", 0.30}, {"E1", 0.18}, {"J4", 0.12}, {"N1", 0.10},
                     {"F3", 0.15}, {"K5", 0.08}, {"M1", 0.20}, {"C7", 0.05}};
  s.procedure = {"135", 0.25};
  s.main_dx = {"main_dx", {"I", "J", "K"}, {0.45, 0.35, 0.20}};
  s.categoricals = {
      {"admission_type",
       {"elective", "emergency", "transfer", "maternity", "other"},
       {0.35, 0.40, 0.10, 0.10, 0.05}},
      {"department",
       {"medicine", "surgery", "cardiology", "oncology", "psychiatry", "paediatrics", "orthopaedics"},
       {0.30, 0.20, 0.15, 0.08, 0.07, 0.10, 0.10}},
      {"month",
       {"01", "02", "03", "04", "05", "06", "07", "08", "09", "10", "11", "12"},
       {0.09, 0.08, 0.085, 0.08, 0.085, 0.08, 0.09, 0.085, 0.08, 0.085, 0.08, 0.08}},
  };
  s.age = {{0.25, 0.75}, {9.0, 62.0}, {5.0, 15.0}, 0.0, 100.0};
  s.length_of_stay = {{0.6, 0.4}, {2.0, 9.0}, {1.0, 3.0}, 1.0, 60.0};
  s.intercept = -4.2;
  s.coefficients = {
      {"age", 0.03},
      {"length_of_stay", 0.12},
      {"female", -0.25},
      {"dx_I1", 0.8},
      {"dx_E1", 0.9},
      {"dx_J4", 0.6},
      {"dx_N1", 1.1},
      {"dx_F3", 0.7},
      {"dx_K5", -0.4},
      {"dx_M1", 0.2},
      {"dx_C7", 1.4},
      {"proc_135", -0.7},
      {"main_dx=J", 0.5},
      {"main_dx=K", -0.3},
      {"admission_type=emergency", 0.9},
      {"admission_type=transfer", 0.5},
      {"department=oncology", 0.8},
      {"department=psychiatry", 0.6},
  };
  return s;
}

void ReferenceDataSpec::validate() const {
  if (rows < 1) throw ConfigError("reference data needs at least one row");
  if (years.size() < 2) throw ConfigError("reference data needs at least two years");
  if (!(death_rate >= 0.0 && death_rate < 1.0)) throw ConfigError("death_rate must lie in [0, 1)");
  if (!(female_p >= 0.0 && female_p <= 1.0)) throw ConfigError("female_p must lie in [0, 1]");
  for (const auto& g : additional_dx) {
    if (g.group.size() != 2) throw ConfigError("additional diagnosis group '" + g.group + "' must be 2 characters");
    if (!(g.p >= 0.0 && g.p <= 1.0)) throw ConfigError("group probability outside [0, 1]");
  }
  if (procedure.group.size() != 3) throw ConfigError("procedure group must be 3 characters");
  if (!(procedure.p >= 0.0 && procedure.p <= 1.0)) throw ConfigError("procedure probability outside [0, 1]");
  check_probs("main_dx", main_dx.probs);
  if (main_dx.categories.size() != main_dx.probs.size()) throw ConfigError("main_dx: size mismatch");
  for (const auto& c : categoricals) {
    check_probs(c.name, c.probs);
    if (c.categories.size() != c.probs.size()) throw ConfigError(c.name + ": size mismatch");
  }
  check_mixture("age", age);
  check_mixture("length_of_stay", length_of_stay);
}

nlohmann::json to_json(const ReferenceDataSpec& s) {
  nlohmann::json dx = nlohmann::json::array();
  for (const auto& g : s.additional_dx) dx.push_back({{"group", g.group}, {"p", g.p}});
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : s.categoricals) cats.push_back(categorical_json(c));
  return {{"rows", s.rows},
          {"years", s.years},
          {"death_rate", s.death_rate},
          {"female_p", s.female_p},
          {"additional_dx", dx},
          {"procedure", {{"group", s.procedure.group}, {"p", s.procedure.p}}},
          {"main_dx", categorical_json(s.main_dx)},
          {"categoricals", cats},
          {"age", mixture_json(s.age)},
          {"length_of_stay", mixture_json(s.length_of_stay)},
          {"label", {{"intercept", s.intercept}, {"coefficients", s.coefficients}}}};
}

ReferenceDataSpec reference_spec_from_json(const nlohmann::json& j) {
  try {
    ReferenceDataSpec s = ReferenceDataSpec::defaults();
    if (j.contains("rows")) s.rows = j.at("rows").get<std::size_t>();
    if (j.contains("years")) s.years = j.at("years").get<std::vector<int>>();
    if (j.contains("death_rate")) s.death_rate = j.at("death_rate").get<double>();
    if (j.contains("female_p")) s.female_p = j.at("female_p").get<double>();
    if (j.contains("additional_dx")) {
      s.additional_dx.clear();
      for (const auto& g : j.at("additional_dx")) {
        s.additional_dx.push_back({g.at("group").get<std::string>(), g.at("p").get<double>()});
      }
    }
    if (j.contains("procedure")) {
      s.procedure = {j["procedure"].at("group").get<std::string>(), j["procedure"].at("p").get<double>()};
    }
    if (j.contains("main_dx")) s.main_dx = categorical_from(j.at("main_dx"));
    if (j.contains("categoricals")) {
      s.categoricals.clear();
      for (const auto& c : j.at("categoricals")) s.categoricals.push_back(categorical_from(c));
    }
    if (j.contains("age")) s.age = mixture_from(j.at("age"));
    if (j.contains("length_of_stay")) s.length_of_stay = mixture_from(j.at("length_of_stay"));
    if (j.contains("label")) {
      const auto& l = j.at("label");
      s.intercept = l.value("intercept", 0.0);
      s.coefficients = l.value("coefficients", std::map<std::string, double>{});
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid reference data configuration: ") + e.what());
  }
}

ReferenceData make_reference_data(const ReferenceDataSpec& spec, std::uint64_t seed) {
  spec.validate();

  // Feature layout of the schema; label coefficients must refer to it.
  Schema schema;
  auto bern = [](std::string name, std::string source, Transform t, std::string group) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::kBernoulli;
    f.source = std::move(source);
    f.transform = t;
    f.group = std::move(group);
    return f;
  };
  schema.features.push_back(bern("female", "", Transform::kNone, ""));
  for (const auto& g : spec.additional_dx) {
    schema.features.push_back(bern(dx_feature(g.group), "additional_dx", Transform::kIcdAdditional, g.group));
  }
  schema.features.push_back(
      bern(proc_feature(spec.procedure.group), "procedures", Transform::kIcdProcedure, spec.procedure.group));
  {
    FeatureSpec f;
    f.name = spec.main_dx.name;
    f.kind = FeatureKind::kCategorical;
    f.categories = spec.main_dx.categories;
    f.transform = Transform::kIcdMain;
    schema.features.push_back(f);
  }
  for (const auto& c : spec.categoricals) {
    FeatureSpec f;
    f.name = c.name;
    f.kind = FeatureKind::kCategorical;
    f.categories = c.categories;
    schema.features.push_back(f);
  }
  for (const char* name : {"age", "length_of_stay"}) {
    FeatureSpec f;
    f.name = name;
    f.kind = FeatureKind::kContinuous;
    f.is_count = true;
    schema.features.push_back(f);
  }
  {
    FeatureSpec f = bern("returning", "", Transform::kNone, "");
    f.is_label = true;
    schema.features.push_back(f);
  }
  schema.filters.push_back({"died", CompareOp::kEq, "0"});
  schema.test_split = RowPredicate{"year", CompareOp::kGe, std::to_string(spec.years.back())};
  schema.validate();

  // Resolve label coefficients to (feature, optional category).
  struct Term {
    std::size_t feature;
    std::optional<std::size_t> category;
    double coef;
  };
  std::vector<Term> terms;
  for (const auto& [key, coef] : spec.coefficients) {
    const auto eq = key.find('=');
    const std::string fname = key.substr(0, eq);
    const auto fi = schema.find(fname);
    if (!fi || schema.features[*fi].is_label) {
      throw ConfigError("label coefficient '" + key + "' names no feature");
    }
    const FeatureSpec& f = schema.features[*fi];
    if (eq != std::string::npos) {
      if (f.kind != FeatureKind::kCategorical) {
        throw ConfigError("label coefficient '" + key + "': feature is not categorical");
      }
      terms.push_back({*fi, f.category_index(key.substr(eq + 1)), coef});
    } else {
      if (f.kind == FeatureKind::kCategorical) {
        throw ConfigError("label coefficient '" + key + "' needs '=category' for a categorical feature");
      }
      terms.push_back({*fi, std::nullopt, coef});
    }
  }

  Table raw;
  raw.columns = {"year", "died", "female", "age", "length_of_stay", "main_dx"};
  for (const auto& c : spec.categoricals) raw.columns.push_back(c.name);
  raw.columns.insert(raw.columns.end(), {"additional_dx", "procedures", "returning"});

  Rng rng = make_rng(seed, "reference-data");
  std::size_t label_ones = 0;
  raw.rows.reserve(spec.rows);
  std::vector<double> x(schema.features.size());
  std::vector<std::size_t> cat(schema.features.size());
  for (std::size_t r = 0; r < spec.rows; ++r) {
    std::vector<std::string> row;
    const int year = spec.years[uniform_index(rng, spec.years.size())];
    const bool died = uniform01(rng) < spec.death_rate;
    const bool female = uniform01(rng) < spec.female_p;
    const double age = draw_mixture(rng, spec.age);
    const double los = draw_mixture(rng, spec.length_of_stay);
    std::size_t fi = 0;
    x[fi++] = female;

    std::vector<std::string> dx_codes;
    for (const auto& g : spec.additional_dx) {
      const bool hit = uniform01(rng) < g.p;
      x[fi++] = hit;
      if (hit) {
        dx_codes.push_back(g.group + std::to_string(uniform_index(rng, 10)) + "." +
                           std::to_string(uniform_index(rng, 10)));
      }
    }
    if (uniform01(rng) < 0.3) dx_codes.push_back(kNoiseDx[uniform_index(rng, kNoiseDx.size())]);
    // Shuffle so group order carries no signal.
    for (std::size_t i = dx_codes.size(); i > 1; --i) {
      std::swap(dx_codes[i - 1], dx_codes[uniform_index(rng, i)]);
    }
    std::vector<std::string> proc_codes;
    const bool proc = uniform01(rng) < spec.procedure.p;
    x[fi++] = proc;
    if (proc) proc_codes.push_back(spec.procedure.group + std::to_string(1000 + uniform_index(rng, 9000)));
    if (uniform01(rng) < 0.4) proc_codes.push_back(kNoiseProc[uniform_index(rng, kNoiseProc.size())]);

    const std::size_t main = draw_category(rng, spec.main_dx.probs);
    cat[fi++] = main;
    const std::string main_code = spec.main_dx.categories[main] +
                                  std::to_string(10 + uniform_index(rng, 90)) + "." +
                                  std::to_string(uniform_index(rng, 10));
    std::vector<std::size_t> cat_values;
    for (const auto& c : spec.categoricals) {
      const std::size_t v = draw_category(rng, c.probs);
      cat_values.push_back(v);
      cat[fi++] = v;
    }
    x[fi++] = age;
    x[fi++] = los;

    double logit = spec.intercept;
    for (const Term& t : terms) {
      if (t.category) {
        logit += cat[t.feature] == *t.category ? t.coef : 0.0;
      } else {
        logit += t.coef * x[t.feature];
      }
    }
    const bool label = uniform01(rng) < 1.0 / (1.0 + std::exp(-logit));
    label_ones += label;

    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + v[i];
      return s;
    };
    row.push_back(std::to_string(year));
    row.push_back(died ? "1" : "0");
    row.push_back(female ? "1" : "0");
    row.push_back(std::to_string(static_cast<long long>(age)));
    row.push_back(std::to_string(static_cast<long long>(los)));
    row.push_back(main_code);
    for (std::size_t c = 0; c < spec.categoricals.size(); ++c) {
      row.push_back(spec.categoricals[c].categories[cat_values[c]]);
    }
    row.push_back(join(dx_codes));
    row.push_back(join(proc_codes));
    row.push_back(label ? "1" : "0");
    raw.rows.push_back(std::move(row));
  }

  ReferenceData out;
  out.raw = std::move(raw);
  out.schema = std::move(schema);
  out.ground_truth = {{"seed", seed},
                      {"spec", to_json(spec)},
                      {"label_rate", static_cast<double>(label_ones) / static_cast<double>(spec.rows)}};
  return out;
}

}  // namespace ehrgan
