// Copyright 2026 The mvpcl Authors
//
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

// CSV input and round-trip-safe text output.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvpcl/types.hpp"

namespace mvpcl::io {

/// Numeric CSV with a header row. Fields may be double-quoted; missing
/// values are rejected.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  /// Column position by header name; InputError if absent.
  Index column(const std::string& name) const;
};

CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);

/// Selected columns as a 0/1 matrix; other values raise InputError naming
/// the row (1-based data line) and column.
BinaryMatrix binary_columns(const CsvTable& table, const std::vector<Index>& columns,
                            const std::string& source);

/// Shortest decimal form that reads back bit-identical (std::to_chars).
/// Non-finite values print as nan / inf / -inf.
std::string format_double(double value);

/// JSON text with every floating-point number printed by format_double and
/// non-finite numbers as null.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

nlohmann::ordered_json read_json(const std::filesystem::path& path);

/// Writes a CSV row, quoting fields that need it.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace mvpcl::io
