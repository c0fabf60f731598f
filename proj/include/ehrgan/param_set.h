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

#ifndef EHRGAN_PARAM_SET_H_
#define EHRGAN_PARAM_SET_H_

#include <span>
#include <string>
#include <vector>

#include "ehrgan/autodiff.h"
#include "ehrgan/tensor.h"

namespace ehrgan {

// Named, ordered parameter tensors. Names are unique and shapes never change
// after `add`; only values may be mutated.
class ParamSet {
 public:
  void add(std::string name, Tensor value);

  std::size_t size() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const Tensor& operator[](std::size_t i) const { return tensors_.at(i); }
  const Tensor& at(const std::string& name) const;
  std::span<double> values(std::size_t i) { return tensors_.at(i).values(); }
  std::span<const double> values(std::size_t i) const { return tensors_.at(i).values(); }

  // Total number of scalar components.
  std::size_t total_size() const;
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& o) const;

  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

// Euclidean norm over the concatenation of every tensor.
double global_norm(const ParamSet& p);

// Registers every parameter as a borrowed leaf on `tape`.
std::vector<ad::Var> bind(ad::Tape& tape, const ParamSet& params);

// Gradient of `output` with respect to `bound` (as returned by `bind`),
// packaged with the names and shapes of `like`.
ParamSet grad(ad::Tape& tape, ad::Var output, const ParamSet& like,
              std::span<const ad::Var> bound);

}  // namespace ehrgan

#endif  // EHRGAN_PARAM_SET_H_
