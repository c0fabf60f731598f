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

#include "ehrgan/matrix_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "ehrgan/errors.h"

namespace ehrgan {
namespace {

static_assert(std::endian::native == std::endian::little,
              "matrix files are written in host order, which must be little-endian");

constexpr char kMagic[4] = {'E', 'H', 'R', 'M'};

}  // namespace

void write_matrix(const std::string& path, const Tensor& m) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError("cannot write matrix file '" + path + "'");
  const std::uint64_t rows = m.rows();
  const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!out) throw PathError("short write to matrix file '" + path + "'");
}

Tensor read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError("cannot open matrix file '" + path + "'");
  char magic[4];
  std::uint64_t rows = 0;
  std::uint32_t cols = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("'" + path + "' is not an encoded matrix file");
  }
  const std::uintmax_t expected = 16 + rows * cols * sizeof(double);
  if (std::filesystem::file_size(path) != expected) {
    throw FormatError("matrix file '" + path + "' has the wrong size for " +
                      std::to_string(rows) + " x " + std::to_string(cols));
  }
  Tensor m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw FormatError("truncated matrix file '" + path + "'");
  return m;
}

}  // namespace ehrgan
