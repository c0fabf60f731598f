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

// Dense matrix kernels used by the autodiff engine.
//
// The OpenMP versions split work by output column strip and keep the per-element
// summation order fixed, so results are bit-identical for any thread count.
// The `serial` namespace holds straightforward reference loops used by the
// tests and the benchmark; they agree with the fast path to rounding error.

#ifndef EHRGAN_KERNELS_H_
#define EHRGAN_KERNELS_H_

#include <cstddef>

#include "ehrgan/tensor.h"

namespace ehrgan::kernels {

// c[n x m] = a[n x k] * b[k x m]
void matmul(const double* a, const double* b, double* c, std::size_t n,
            std::size_t k, std::size_t m);
// c[n x m] = a[n x k] * b[m x k]^T
void matmul_nt(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m);
// c[n x m] = a[k x n]^T * b[k x m]
void matmul_tn(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m);

double dot(const double* a, const double* b, std::size_t n);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// Number of OpenMP threads the kernels will use (1 when built without it).
int max_threads();
void set_threads(int n);

namespace serial {

void matmul(const double* a, const double* b, double* c, std::size_t n,
            std::size_t k, std::size_t m);
void matmul_nt(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m);
void matmul_tn(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);

}  // namespace serial
}  // namespace ehrgan::kernels

#endif  // EHRGAN_KERNELS_H_
