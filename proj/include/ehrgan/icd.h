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

// ICD-10 code grouping used to reduce diagnosis/procedure sparsity.
// Codes are whitespace-trimmed and uppercased before grouping.

#ifndef EHRGAN_ICD_H_
#define EHRGAN_ICD_H_

#include <string>
#include <string_view>
#include <vector>

namespace ehrgan::icd {

std::string normalize(std::string_view code);

// Main diagnosis category: the leading letter ("A15.3" -> "A").
std::string group_main(std::string_view code);
// Additional diagnosis category: letter plus first digit ("A15.3" -> "A1").
std::string group_additional(std::string_view code);
// Procedure group: first three characters ("1234567" -> "123").
std::string group_procedure(std::string_view code);

// Splits a multi-valued cell ("A15.3;B29") into trimmed, non-empty codes.
std::vector<std::string> split_codes(std::string_view cell, char sep = ';');

}  // namespace ehrgan::icd

#endif  // EHRGAN_ICD_H_
