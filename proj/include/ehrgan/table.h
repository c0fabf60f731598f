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

#ifndef EHRGAN_TABLE_H_
#define EHRGAN_TABLE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ehrgan {

// A CSV table held as strings; typing happens against a Schema.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t size() const { return rows.size(); }
  std::optional<std::size_t> find_column(std::string_view name) const;
  // Throws SchemaError when absent.
  std::size_t column_index(std::string_view name) const;
  Table select_rows(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const Table&, const Table&) = default;
};

// RFC 4180 subset: comma separated, optional double quotes, header row.
Table parse_csv(std::string_view text);
std::string to_csv(const Table& table);

Table read_csv(const std::filesystem::path& path);
void write_csv(const Table& table, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace ehrgan

#endif  // EHRGAN_TABLE_H_
