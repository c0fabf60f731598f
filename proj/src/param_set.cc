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

#include "ehrgan/param_set.h"

#include <algorithm>
#include <cmath>

#include "ehrgan/errors.h"

namespace ehrgan {

void ParamSet::add(std::string name, Tensor value) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw ContractError("duplicate parameter name: " + name);
  }
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ContractError("unknown parameter: " + name);
  return tensors_[it - names_.begin()];
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (std::size_t i = 0; i < size(); ++i) {
    out.add(names_[i], Tensor(tensors_[i].rows(), tensors_[i].cols()));
  }
  return out;
}

bool ParamSet::same_layout(const ParamSet& o) const {
  if (size() != o.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (names_[i] != o.names_[i] || !tensors_[i].same_shape(o.tensors_[i])) return false;
  }
  return true;
}

std::vector<double> ParamSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_size());
  for (const Tensor& t : tensors_) flat.insert(flat.end(), t.values().begin(), t.values().end());
  return flat;
}

void ParamSet::assign_flat(std::span<const double> flat) {
  if (flat.size() != total_size()) {
    throw DimensionError("assign_flat: expected " + std::to_string(total_size()) +
                         " values, got " + std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (Tensor& t : tensors_) {
    std::copy(flat.begin() + off, flat.begin() + off + t.size(), t.data());
    off += t.size();
  }
}

double global_norm(const ParamSet& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += squared_norm(p[i]);
  return std::sqrt(s);
}

std::vector<ad::Var> bind(ad::Tape& tape, const ParamSet& params) {
  std::vector<ad::Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.leaf_ref(params[i]));
  return vars;
}

ParamSet grad(ad::Tape& tape, ad::Var output, const ParamSet& like,
              std::span<const ad::Var> bound) {
  if (bound.size() != like.size()) {
    throw ContractError("grad: bound parameter count does not match the ParamSet");
  }
  std::vector<ad::Var> g = tape.gradients(output, bound);
  ParamSet out;
  for (std::size_t i = 0; i < like.size(); ++i) out.add(like.name(i), g[i].value());
  return out;
}

}  // namespace ehrgan
