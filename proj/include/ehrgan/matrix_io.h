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

// Encoded matrix cache: a 16-byte header ("EHRM", u64 rows, u32 cols, all
// little-endian) followed by rows * cols little-endian doubles, row-major.

#ifndef EHRGAN_MATRIX_IO_H_
#define EHRGAN_MATRIX_IO_H_

#include <string>

#include "ehrgan/tensor.h"

namespace ehrgan {

void write_matrix(const std::string& path, const Tensor& m);
Tensor read_matrix(const std::string& path);

}  // namespace ehrgan

#endif  // EHRGAN_MATRIX_IO_H_
