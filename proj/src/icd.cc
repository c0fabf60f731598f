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

#include "ehrgan/icd.h"

#include <cctype>

#include "ehrgan/errors.h"

namespace ehrgan::icd {
namespace {

bool is_upper_letter(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string normalize(std::string_view code) {
  std::size_t b = 0;
  std::size_t e = code.size();
  while (b < e && std::isspace(static_cast<unsigned char>(code[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(code[e - 1]))) --e;
  std::string out(code.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string group_main(std::string_view code) {
  const std::string c = normalize(code);
  if (c.empty() || !is_upper_letter(c[0])) {
    throw ParseError("ICD main diagnosis must start with a letter: '" +
                     std::string(code) + "'");
  }
  return c.substr(0, 1);
}

std::string group_additional(std::string_view code) {
  const std::string c = normalize(code);
  if (c.size() < 2 || !is_upper_letter(c[0]) || !is_digit(c[1])) {
    throw ParseError("ICD additional diagnosis needs a letter followed by a digit: '" +
                     std::string(code) + "'");
  }
  return c.substr(0, 2);
}

std::string group_procedure(std::string_view code) {
  const std::string c = normalize(code);
  if (c.size() < 3) {
    throw ParseError("ICD procedure code shorter than 3 characters: '" +
                     std::string(code) + "'");
  }
  return c.substr(0, 3);
}

std::vector<std::string> split_codes(std::string_view cell, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= cell.size()) {
    std::size_t end = cell.find(sep, start);
    if (end == std::string_view::npos) end = cell.size();
    std::string c = normalize(cell.substr(start, end - start));
    if (!c.empty()) out.push_back(std::move(c));
    start = end + 1;
  }
  return out;
}

}  // namespace ehrgan::icd
