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

#include "ehrgan/table.h"

#include <fstream>
#include <sstream>

#include "ehrgan/errors.h"

namespace ehrgan {

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::column_index(std::string_view name) const {
  auto idx = find_column(name);
  if (!idx) throw SchemaError("table has no column '" + std::string(name) + "'");
  return *idx;
}

Table Table::select_rows(const std::vector<std::size_t>& indices) const {
  Table out;
  out.columns = columns;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(rows.at(i));
  return out;
}

namespace {

// Parses one record starting at `pos`; advances `pos` past the line break.
std::vector<std::string> parse_record(std::string_view text, std::size_t& pos,
                                      std::size_t line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw ParseError("csv line " + std::to_string(line) + ": stray quote");
      }
      quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      break;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (quoted) throw ParseError("csv line " + std::to_string(line) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out.append(s);
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

Table parse_csv(std::string_view text) {
  Table t;
  std::size_t pos = 0;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;  // UTF-8 BOM
  if (pos >= text.size()) throw ParseError("csv: missing header row");
  std::size_t line = 1;
  t.columns = parse_record(text, pos, line);
  while (pos < text.size()) {
    ++line;
    // Skip blank lines.
    if (text[pos] == '\n' || text[pos] == '\r') {
      ++pos;
      continue;
    }
    auto rec = parse_record(text, pos, line);
    if (rec.size() != t.columns.size()) {
      throw ParseError("csv line " + std::to_string(line) + ": expected " +
                       std::to_string(t.columns.size()) + " fields, got " +
                       std::to_string(rec.size()));
    }
    t.rows.push_back(std::move(rec));
  }
  return t;
}

std::string to_csv(const Table& table) {
  std::string out;
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      append_field(out, row[i]);
    }
    out.push_back('\n');
  };
  write_row(table.columns);
  for (const auto& r : table.rows) write_row(r);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw PathError("write failed for " + path.string());
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

void write_csv(const Table& table, const std::filesystem::path& path) {
  write_file(path, to_csv(table));
}

}  // namespace ehrgan
