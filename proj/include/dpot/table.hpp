// Copyright 2026 The dpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPOT_TABLE_HPP_
#define DPOT_TABLE_HPP_

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "dpot/errors.hpp"

namespace dpot {

// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::size_t v) { return std::to_string(v); }

inline double parse_number(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("not a number: " + std::string(s));
  return v;
}

// Headered comma-delimited text, one artifact per file:
//
//   # dpot <kind> v<version>
//   # <key>: <value>          (zero or more metadata lines)
//   col_a,col_b,...
//   1,0.25,...
//
// Cells are stored as text so that read -> write reproduces the input
// byte for byte.
class Table {
 public:
  static constexpr int kVersion = 1;

  Table() = default;
  Table(std::string kind, std::vector<std::string> columns)
      : kind_(std::move(kind)), columns_(std::move(columns)) {
    check_cell(kind_);
    for (const std::string& c : columns_) check_cell(c);
  }

  const std::string& kind() const { return kind_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t n_rows() const { return rows_.size(); }

  void add_meta(std::string key, std::string value) {
    if (key.find(':') != std::string::npos || key.find('\n') != std::string::npos ||
        value.find('\n') != std::string::npos)
      throw ConfigError("metadata must be a single line and key must not contain ':'");
    meta_.emplace_back(std::move(key), std::move(value));
  }

  std::string meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta_)
      if (k == key) return v;
    throw ConfigError("missing metadata key: " + std::string(key));
  }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
      throw ConfigError("row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(columns_.size()));
    for (const std::string& c : cells) check_cell(c);
    rows_.push_back(std::move(cells));
  }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i] == name) return i;
    throw ConfigError("no column named " + std::string(name));
  }

  const std::string& cell(std::size_t row, std::string_view col) const {
    return rows_.at(row).at(column(col));
  }

  double number(std::size_t row, std::string_view col) const {
    return parse_number(cell(row, col));
  }

  std::string str() const {
    std::string out = "# dpot " + kind_ + " v" + std::to_string(kVersion) + "\n";
    for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
    out += join(columns_);
    for (const auto& row : rows_) out += join(row);
    return out;
  }

  static Table parse(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
      const std::size_t nl = text.find('\n');
      if (nl == std::string_view::npos)
        throw ConfigError("table text must end with a newline");
      lines.push_back(text.substr(0, nl));
      text.remove_prefix(nl + 1);
    }
    if (lines.empty()) throw ConfigError("empty table");
    const std::string_view magic = "# dpot ";
    std::string_view first = lines[0];
    if (first.substr(0, magic.size()) != magic) throw ConfigError("not a dpot table");
    first.remove_prefix(magic.size());
    const std::size_t space = first.rfind(' ');
    if (space == std::string_view::npos ||
        first.substr(space + 1) != "v" + std::to_string(kVersion))
      throw ConfigError("unsupported table version");

    Table t;
    t.kind_ = std::string(first.substr(0, space));
    std::size_t i = 1;
    for (; i < lines.size() && lines[i].substr(0, 2) == "# "; ++i) {
      const std::string_view body = lines[i].substr(2);
      const std::size_t colon = body.find(": ");
      if (colon == std::string_view::npos) throw ConfigError("malformed metadata line");
      t.meta_.emplace_back(std::string(body.substr(0, colon)),
                           std::string(body.substr(colon + 2)));
    }
    if (i == lines.size()) throw ConfigError("table has no header");
    t.columns_ = split(lines[i++]);
    for (; i < lines.size(); ++i) t.add_row(split(lines[i]));
    return t;
  }

  static Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  void write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << str();
  }

  bool operator==(const Table&) const = default;

 private:
  static void check_cell(const std::string& c) {
    if (c.find_first_of(",\n\r") != std::string::npos)
      throw ConfigError("table cell contains a delimiter: " + c);
  }

  static std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
    return out;
  }

  static std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    while (true) {
      const std::size_t comma = line.find(',');
      out.emplace_back(line.substr(0, comma));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    return out;
  }

  std::string kind_;
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace dpot

#endif  // DPOT_TABLE_HPP_
