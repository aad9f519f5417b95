// Copyright 2026 The pnobench Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pno/tabular.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "pno/error.hpp"

namespace pno {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_cell(const std::string& raw, std::size_t row,
                  const std::string& column) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse '" + s + "' as a finite number");
  }
  return v;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("missing column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      // Strip a UTF-8 byte order mark.
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      for (auto& h : split_line(line)) table.header.push_back(trim(h));
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(table.rows.size() + 1) +
                       ": expected " + std::to_string(table.header.size()) +
                       " cells, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << quote(cells[i]);
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<Instance> load_tabular(const std::string& path,
                                   const TabularSchema& schema) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) {
    throw EmptyDatasetError("'" + path + "' has no data rows");
  }
  if (schema.feature_columns.empty() || schema.target_columns.empty()) {
    throw SchemaError("schema needs at least one feature and one target column");
  }
  std::vector<std::size_t> fcols, tcols;
  for (const auto& c : schema.feature_columns) fcols.push_back(table.column(c));
  for (const auto& c : schema.target_columns) tcols.push_back(table.column(c));
  const bool grouped = !schema.group_column.empty();
  const std::size_t gcol = grouped ? table.column(schema.group_column) : 0;

  std::map<std::string, std::size_t> group_index;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string key = grouped ? trim(table.rows[r][gcol]) : "";
    auto [it, inserted] = group_index.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(r);
  }

  std::vector<Instance> out;
  for (const auto& rows : groups) {
    Instance inst;
    inst.x = Tensor(Shape{rows.size(), fcols.size()});
    inst.y = Tensor(Shape{rows.size() * tcols.size()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& cells = table.rows[rows[i]];
      for (std::size_t f = 0; f < fcols.size(); ++f) {
        inst.x.at(i, f) =
            parse_cell(cells[fcols[f]], rows[i] + 1, table.header[fcols[f]]);
      }
      for (std::size_t t = 0; t < tcols.size(); ++t) {
        inst.y[i * tcols.size() + t] =
            parse_cell(cells[tcols[t]], rows[i] + 1, table.header[tcols[t]]);
      }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace pno
