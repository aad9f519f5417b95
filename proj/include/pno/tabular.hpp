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

// CSV ingestion. A header row is required; cells are comma separated and may
// be double-quoted.

#ifndef PNO_TABULAR_HPP_
#define PNO_TABULAR_HPP_

#include <string>
#include <vector>

#include "pno/problem.hpp"

namespace pno {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, or throws SchemaError.
  std::size_t column(const std::string& name) const;
};

/// Throws IoError if the file cannot be opened and ParseError on ragged rows.
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

struct TabularSchema {
  std::vector<std::string> feature_columns;
  std::vector<std::string> target_columns;
  /// Rows sharing a value in this column form one instance, in order of first
  /// appearance. Empty means the whole file is one instance.
  std::string group_column;
};

/// One instance per group: x has one row per CSV row (feature columns), y is
/// the target columns flattened row-major. Row numbers in errors are 1-based
/// data rows (the header is not counted).
std::vector<Instance> load_tabular(const std::string& path,
                                   const TabularSchema& schema);

}  // namespace pno

#endif  // PNO_TABULAR_HPP_
