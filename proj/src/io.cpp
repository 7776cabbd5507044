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

#include "mvpcl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mvpcl::io {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line, const std::string& where) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && trim(current).empty()) {
      quoted = true;
      was_quoted = true;
      current.clear();
    } else if (c == ',') {
      fields.push_back(was_quoted ? current : trim(current));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (quoted) {
    throw InputError(where + ": unterminated quoted field");
  }
  fields.push_back(was_quoted ? current : trim(current));
  return fields;
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) {
      return static_cast<Index>(j);
    }
  }
  throw InputError("column '" + name + "' not found in the CSV header");
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (trim(line).empty()) {
      if (table.header.empty()) {
        throw InputError(where + ": empty header line");
      }
      continue;
    }
    auto fields = split_fields(line, where);
    if (table.header.empty()) {
      for (std::size_t j = 0; j < fields.size(); ++j) {
        if (fields[j].empty()) {
          throw InputError(where + ": header column " + std::to_string(j + 1) + " is empty");
        }
        for (std::size_t i = 0; i < j; ++i) {
          if (fields[i] == fields[j]) {
            throw InputError(where + ": duplicate header column '" + fields[j] + "'");
          }
        }
      }
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InputError(where + ": expected " + std::to_string(table.header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      const std::string col_where =
          where + ", column " + std::to_string(j + 1) + " ('" + table.header[j] + "')";
      if (f.empty() || f == "NA" || f == "NaN" || f == "nan" || f == ".") {
        throw InputError(col_where + ": missing value");
      }
      const char* begin = f.data();
      const char* end = f.data() + f.size();
      if (*begin == '+') {
        ++begin;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw InputError(col_where + ": cannot parse '" + f + "' as a finite number");
      }
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (table.header.empty()) {
    throw InputError(source + ": no header row");
  }
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  return parse_csv(in, path.string());
}

BinaryMatrix binary_columns(const CsvTable& table, const std::vector<Index>& columns,
                            const std::string& source) {
  BinaryMatrix y(table.values.rows(), static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const Index j = columns[c];
    for (Index i = 0; i < table.values.rows(); ++i) {
      const double v = table.values(i, j);
      if (v != 0.0 && v != 1.0) {
        throw InputError(source + ":" + std::to_string(i + 2) + ", column " +
                         std::to_string(j + 1) + " ('" +
                         table.header[static_cast<std::size_t>(j)] + "'): response value " +
                         format_double(v) + " is not 0 or 1 (data row " + std::to_string(i + 1) +
                         ")");
      }
      y(i, static_cast<Index>(c)) = v == 1.0 ? 1 : 0;
    }
  }
  return y;
}

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

namespace {

void write_json(std::string& out, const nlohmann::ordered_json& v, int indent, int depth) {
  using Type = nlohmann::ordered_json::value_t;
  const auto newline = [&](int d) {
    if (indent >= 0) {
      out.push_back('\n');
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  switch (v.type()) {
    case Type::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      break;
    }
    case Type::array: {
      if (v.empty()) {
        out += "[]";
        break;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(v.begin(), v.end(),
                                     [](const auto& e) { return e.is_structured(); });
      out.push_back('[');
      bool first = true;
      for (const auto& e : v) {
        if (!first) {
          out += flat || indent < 0 ? ", " : ",";
        }
        if (!flat) {
          newline(depth + 1);
        }
        write_json(out, e, indent, depth + 1);
        first = false;
      }
      if (!flat) {
        newline(depth);
      }
      out.push_back(']');
      break;
    }
    case Type::object: {
      if (v.empty()) {
        out += "{}";
        break;
      }
      out.push_back('{');
      bool first = true;
      for (const auto& [key, e] : v.items()) {
        if (!first) {
          out.push_back(',');
        }
        newline(depth + 1);
        out += nlohmann::ordered_json(key).dump();
        out += ": ";
        write_json(out, e, indent, depth + 1);
        first = false;
      }
      newline(depth);
      out.push_back('}');
      break;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  write_json(out, value, indent, 0);
  out.push_back('\n');
  return out;
}

nlohmann::ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      out << '"';
      for (char c : f) {
        if (c == '"') {
          out << '"';
        }
        out << c;
      }
      out << '"';
    } else {
      out << f;
    }
  }
  out << '\n';
}

}  // namespace mvpcl::io
