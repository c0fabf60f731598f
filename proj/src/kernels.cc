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

#include "ehrgan/kernels.h"

#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <vector>

#include "ehrgan/errors.h"

namespace ehrgan::kernels {
namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 16;

bool worth_parallel(std::size_t n, std::size_t k, std::size_t m) {
  return n * k * m >= kParallelWork;
}

void check_shapes(const char* what, std::size_t a_inner, std::size_t b_inner,
                  const Tensor& a, const Tensor& b) {
  if (a_inner != b_inner) {
    throw DimensionError(std::string(what) + ": incompatible shapes " +
                         a.shape_string() + " and " + b.shape_string());
  }
}

using v8d = double __attribute__((vector_size(64)));
constexpr std::size_t kStrip = 16;  // output columns per packed strip
constexpr std::size_t kTileRows = 8;

inline v8d load8(const double* p) {
  v8d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

// R rows of op(a) times a packed k x 16 strip of b. Row r of op(a) is read at
// a[r * a_rs + p * a_cs]. Every output element is accumulated over
// p = 0 .. k-1 in order, so the tiling never changes the result.
template <std::size_t R>
void tile(const double* a, std::size_t a_rs, std::size_t a_cs, const double* strip,
          std::size_t k, double* out) {
  v8d acc[R][2] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const v8d b0 = load8(strip + p * kStrip);
    const v8d b1 = load8(strip + p * kStrip + 8);
    for (std::size_t r = 0; r < R; ++r) {
      const double av = a[r * a_rs + p * a_cs];
      acc[r][0] += av * b0;
      acc[r][1] += av * b1;
    }
  }
  std::memcpy(out, acc, sizeof acc);
}

void rows_tile(std::size_t rows, const double* a, std::size_t a_rs, std::size_t a_cs,
               const double* strip, std::size_t k, double* out) {
  switch (rows) {
    case 8: tile<8>(a, a_rs, a_cs, strip, k, out); break;
    case 7: tile<7>(a, a_rs, a_cs, strip, k, out); break;
    case 6: tile<6>(a, a_rs, a_cs, strip, k, out); break;
    case 5: tile<5>(a, a_rs, a_cs, strip, k, out); break;
    case 4: tile<4>(a, a_rs, a_cs, strip, k, out); break;
    case 3: tile<3>(a, a_rs, a_cs, strip, k, out); break;
    case 2: tile<2>(a, a_rs, a_cs, strip, k, out); break;
    default: tile<1>(a, a_rs, a_cs, strip, k, out); break;
  }
}

// c[n x m] = op(a) * b with op(a)[i][p] = a[i * a_rs + p * a_cs] and b a
// row-major k x m matrix. Threads take whole column strips.
void gemm(const double* a, std::size_t a_rs, std::size_t a_cs, const double* b,
          double* c, std::size_t n, std::size_t k, std::size_t m) {
  const auto strips = static_cast<std::int64_t>((m + kStrip - 1) / kStrip);
#pragma omp parallel if (worth_parallel(n, k, m))
  {
    std::vector<double> packed(k * kStrip);
    double out[kTileRows * kStrip];
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < strips; ++s) {
      const std::size_t j0 = static_cast<std::size_t>(s) * kStrip;
      const std::size_t w = std::min(kStrip, m - j0);
      // Pack the strip, zero-padding a ragged last strip.
      for (std::size_t p = 0; p < k; ++p) {
        double* dst = packed.data() + p * kStrip;
        const double* src = b + p * m + j0;
        for (std::size_t j = 0; j < w; ++j) dst[j] = src[j];
        for (std::size_t j = w; j < kStrip; ++j) dst[j] = 0.0;
      }
      for (std::size_t i = 0; i < n; i += kTileRows) {
        const std::size_t rows = std::min(kTileRows, n - i);
        rows_tile(rows, a + i * a_rs, a_rs, a_cs, packed.data(), k, out);
        for (std::size_t r = 0; r < rows; ++r) {
          std::memcpy(c + (i + r) * m + j0, out + r * kStrip, w * sizeof(double));
        }
      }
    }
  }
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  // Eight independent lanes; the reduction order is fixed.
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  double s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) +
             ((acc[2] + acc[6]) + (acc[3] + acc[7]));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void matmul(const double* a, const double* b, double* c, std::size_t n,
            std::size_t k, std::size_t m) {
  gemm(a, k, 1, b, c, n, k, m);
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m) {
  if (n == 1) {
    for (std::size_t j = 0; j < m; ++j) c[j] = dot(a, b + j * k, k);
    return;
  }
  // Transpose b once so the inner loop streams rows.
  std::vector<double> bt(k * m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t p = 0; p < k; ++p) bt[p * m + j] = b[j * k + p];
  gemm(a, k, 1, bt.data(), c, n, k, m);
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m) {
  gemm(a, 1, n, b, c, n, k, m);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_shapes("matmul", a.cols(), b.rows(), a, b);
  Tensor c(a.rows(), b.cols());
  matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_shapes("matmul_nt", a.cols(), b.cols(), a, b);
  Tensor c(a.rows(), b.rows());
  matmul_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_shapes("matmul_tn", a.rows(), b.rows(), a, b);
  Tensor c(a.cols(), b.cols());
  matmul_tn(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
  return c;
}

int max_threads() { return omp_get_max_threads(); }
void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }

namespace serial {

void matmul(const double* a, const double* b, double* c, std::size_t n,
            std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * m + j];
      c[i * m + j] = s;
    }
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * m + j] = s;
    }
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t n,
               std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * n + i] * b[p * m + j];
      c[i * m + j] = s;
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_shapes("matmul", a.cols(), b.rows(), a, b);
  Tensor c(a.rows(), b.cols());
  matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_shapes("matmul_nt", a.cols(), b.cols(), a, b);
  Tensor c(a.rows(), b.rows());
  matmul_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_shapes("matmul_tn", a.rows(), b.rows(), a, b);
  Tensor c(a.cols(), b.cols());
  matmul_tn(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
  return c;
}

}  // namespace serial
}  // namespace ehrgan::kernels
