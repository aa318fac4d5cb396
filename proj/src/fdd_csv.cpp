/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "cecbench/error.hpp"
#include "cecbench/fdd.hpp"

namespace cecbench::fdd {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

CsvData parse_csv(std::istream& in, const std::string& source, const CsvSchema& schema) {
  CsvData data;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> width;
  bool header_pending = schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> cells;
    std::string_view rest(line);
    std::size_t column = 0;
    while (true) {
      ++column;
      const std::size_t cut = rest.find(schema.delimiter);
      const std::string_view cell = trim(rest.substr(0, cut));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw ParseError(source, line_no, column, "'" + std::string(cell) + "' is not a finite number");
      cells.push_back(v);
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
    if (!width) width = cells.size();
    if (cells.size() != *width)
      throw ParseError(source, line_no, 0,
                       "expected " + std::to_string(*width) + " columns, found " + std::to_string(cells.size()));

    ProcessSample s;
    s.timestamp = static_cast<double>(data.samples.size());
    if (schema.timestamp_column) {
      if (*schema.timestamp_column >= cells.size())
        throw ParseError(source, line_no, 0, "timestamp column is out of range");
      s.timestamp = cells[*schema.timestamp_column];
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(*schema.timestamp_column));
    }
    if (cells.empty()) throw ParseError(source, line_no, 0, "row has no process values");
    s.values = std::move(cells);
    data.samples.push_back(std::move(s));
  }
  if (data.samples.empty()) data.warnings.push_back(source + ": no data rows");
  return data;
}

CsvData ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  return parse_csv(in, path, schema);
}

}  // namespace cecbench::fdd
