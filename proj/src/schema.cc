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

#include "ehrgan/schema.h"

#include <charconv>
#include <set>

#include "ehrgan/errors.h"
#include "ehrgan/table.h"

namespace ehrgan {

using nlohmann::json;

std::string to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::kBernoulli: return "bernoulli";
    case FeatureKind::kCategorical: return "categorical";
    case FeatureKind::kContinuous: return "continuous";
  }
  return "?";
}

std::string to_string(Transform t) {
  switch (t) {
    case Transform::kNone: return "none";
    case Transform::kIcdMain: return "icd_main";
    case Transform::kIcdAdditional: return "icd_additional";
    case Transform::kIcdProcedure: return "icd_procedure";
  }
  return "?";
}

namespace {

FeatureKind kind_from_string(const std::string& s) {
  if (s == "bernoulli") return FeatureKind::kBernoulli;
  if (s == "categorical") return FeatureKind::kCategorical;
  if (s == "continuous") return FeatureKind::kContinuous;
  throw SchemaError("unknown feature kind '" + s + "'");
}

Transform transform_from_string(const std::string& s) {
  if (s == "none") return Transform::kNone;
  if (s == "icd_main") return Transform::kIcdMain;
  if (s == "icd_additional") return Transform::kIcdAdditional;
  if (s == "icd_procedure") return Transform::kIcdProcedure;
  throw SchemaError("unknown transform '" + s + "'");
}

const char* op_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "eq";
    case CompareOp::kNe: return "ne";
    case CompareOp::kLt: return "lt";
    case CompareOp::kLe: return "le";
    case CompareOp::kGt: return "gt";
    case CompareOp::kGe: return "ge";
  }
  return "?";
}

CompareOp op_from_string(const std::string& s) {
  if (s == "eq") return CompareOp::kEq;
  if (s == "ne") return CompareOp::kNe;
  if (s == "lt") return CompareOp::kLt;
  if (s == "le") return CompareOp::kLe;
  if (s == "gt") return CompareOp::kGt;
  if (s == "ge") return CompareOp::kGe;
  throw SchemaError("unknown comparison '" + s + "'");
}

template <typename T>
bool compare(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::kEq: return a == b;
    case CompareOp::kNe: return a != b;
    case CompareOp::kLt: return a < b;
    case CompareOp::kLe: return a <= b;
    case CompareOp::kGt: return a > b;
    case CompareOp::kGe: return a >= b;
  }
  return false;
}

json predicate_to_json(const RowPredicate& p) {
  return json{{"column", p.column}, {"op", op_string(p.op)}, {"value", p.value}};
}

RowPredicate predicate_from_json(const json& j) {
  RowPredicate p;
  p.column = j.at("column").get<std::string>();
  p.op = op_from_string(j.value("op", std::string("eq")));
  const json& v = j.at("value");
  p.value = v.is_string() ? v.get<std::string>() : v.dump();
  return p;
}

}  // namespace

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::size_t FeatureSpec::encoded_width() const {
  switch (kind) {
    case FeatureKind::kBernoulli: return 1;
    case FeatureKind::kCategorical: return categories.size();
    case FeatureKind::kContinuous: return static_cast<std::size_t>(modes) + 1;
  }
  return 0;
}

std::size_t FeatureSpec::category_index(std::string_view value) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == value) return i;
  }
  throw SchemaError("feature '" + name + "': unknown category '" + std::string(value) + "'");
}

bool RowPredicate::matches(std::string_view cell) const {
  double a, b;
  if (parse_double(cell, a) && parse_double(value, b)) return compare(op, a, b);
  return compare(op, std::string_view(cell), std::string_view(value));
}

std::size_t Schema::encoded_width() const {
  std::size_t w = 0;
  for (const auto& f : features) w += f.encoded_width();
  return w;
}

std::vector<std::size_t> Schema::offsets() const {
  std::vector<std::size_t> off;
  std::size_t w = 0;
  for (const auto& f : features) {
    off.push_back(w);
    w += f.encoded_width();
  }
  return off;
}

std::size_t Schema::label_index() const {
  std::optional<std::size_t> idx;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].is_label) {
      if (idx) throw SchemaError("schema declares more than one label feature");
      idx = i;
    }
  }
  if (!idx) throw SchemaError("schema declares no label feature");
  return *idx;
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  return std::nullopt;
}

bool Schema::fitted() const {
  for (const auto& f : features) {
    if (f.kind == FeatureKind::kContinuous && !f.gmm) return false;
  }
  return true;
}

void Schema::validate() const {
  if (features.empty()) throw SchemaError("schema has no features");
  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw SchemaError("feature with empty name");
    if (!names.insert(f.name).second) throw SchemaError("duplicate feature '" + f.name + "'");
    switch (f.kind) {
      case FeatureKind::kBernoulli:
        if (f.transform == Transform::kIcdMain) {
          throw SchemaError("feature '" + f.name + "': icd_main yields a categorical");
        }
        if ((f.transform == Transform::kIcdAdditional ||
             f.transform == Transform::kIcdProcedure) &&
            f.group.empty()) {
          throw SchemaError("feature '" + f.name + "': indicator transform needs a group");
        }
        break;
      case FeatureKind::kCategorical: {
        if (f.categories.size() < 2) {
          throw SchemaError("feature '" + f.name + "': categorical needs K >= 2");
        }
        std::set<std::string> cats(f.categories.begin(), f.categories.end());
        if (cats.size() != f.categories.size()) {
          throw SchemaError("feature '" + f.name + "': duplicate category");
        }
        if (f.transform == Transform::kIcdAdditional || f.transform == Transform::kIcdProcedure) {
          throw SchemaError("feature '" + f.name + "': indicator transforms yield bernoulli");
        }
        break;
      }
      case FeatureKind::kContinuous:
        if (f.modes < 1) throw ConfigError("feature '" + f.name + "': modes must be >= 1");
        if (f.transform != Transform::kNone) {
          throw SchemaError("feature '" + f.name + "': continuous features cannot be derived");
        }
        if (f.gmm) {
          f.gmm->validate();
          if (f.gmm->modes() != static_cast<std::size_t>(f.modes)) {
            throw SchemaError("feature '" + f.name + "': fitted GMM has wrong mode count");
          }
        }
        break;
    }
  }
  const std::size_t li = label_index();
  if (features[li].kind != FeatureKind::kBernoulli) {
    throw SchemaError("label feature '" + features[li].name + "' must be bernoulli");
  }
}

json to_json(const GmmModel& g) {
  return json{{"weights", g.weights}, {"means", g.means}, {"stddevs", g.stddevs}};
}

GmmModel gmm_from_json(const json& j) {
  GmmModel g;
  g.weights = j.at("weights").get<std::vector<double>>();
  g.means = j.at("means").get<std::vector<double>>();
  g.stddevs = j.at("stddevs").get<std::vector<double>>();
  return g;
}

json to_json(const Schema& schema) {
  json feats = json::array();
  for (const auto& f : schema.features) {
    json jf{{"name", f.name}, {"kind", to_string(f.kind)}};
    if (f.kind == FeatureKind::kCategorical) jf["categories"] = f.categories;
    if (f.kind == FeatureKind::kContinuous) {
      jf["modes"] = f.modes;
      if (f.is_count) jf["count"] = true;
      if (f.gmm) jf["gmm"] = to_json(*f.gmm);
    }
    if (f.is_label) jf["label"] = true;
    if (!f.source.empty()) jf["source"] = f.source;
    if (f.transform != Transform::kNone) jf["transform"] = to_string(f.transform);
    if (!f.group.empty()) jf["group"] = f.group;
    feats.push_back(std::move(jf));
  }
  json j{{"features", std::move(feats)}};
  json filters = json::array();
  for (const auto& p : schema.filters) filters.push_back(predicate_to_json(p));
  j["filters"] = std::move(filters);
  if (schema.test_split) j["test_split"] = predicate_to_json(*schema.test_split);
  return j;
}

Schema schema_from_json(const json& j) {
  Schema s;
  try {
    for (const json& jf : j.at("features")) {
      FeatureSpec f;
      f.name = jf.at("name").get<std::string>();
      f.kind = kind_from_string(jf.at("kind").get<std::string>());
      if (jf.contains("categories")) f.categories = jf["categories"].get<std::vector<std::string>>();
      f.modes = jf.value("modes", 5);
      f.is_count = jf.value("count", false);
      f.is_label = jf.value("label", false);
      if (jf.contains("gmm")) f.gmm = gmm_from_json(jf["gmm"]);
      f.source = jf.value("source", std::string());
      f.transform = transform_from_string(jf.value("transform", std::string("none")));
      f.group = jf.value("group", std::string());
      s.features.push_back(std::move(f));
    }
    if (j.contains("filters")) {
      for (const json& p : j["filters"]) s.filters.push_back(predicate_from_json(p));
    }
    if (j.contains("test_split")) s.test_split = predicate_from_json(j["test_split"]);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema JSON: ") + e.what());
  }
  s.validate();
  return s;
}

Schema load_schema(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("cannot parse " + path.string() + ": " + e.what());
  }
  return schema_from_json(j);
}

void save_schema(const Schema& schema, const std::filesystem::path& path) {
  write_file(path, to_json(schema).dump(2) + "\n");
}

}  // namespace ehrgan
