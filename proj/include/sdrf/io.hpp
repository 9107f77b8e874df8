#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sdrf::io {

// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position, or -1 when absent.
  int column(std::string_view name) const;
};

// Plain comma-separated values with a mandatory header row. Quoting is not
// supported; fields are trimmed of surrounding whitespace.
CsvTable read_csv(const std::string& path);

// Parses a numeric field; SchemaError names the column and 1-based data row.
double parse_double(const std::string& field, std::string_view column, std::size_t row);
long long parse_integer(const std::string& field, std::string_view column, std::size_t row);

// Writes to path.tmp and renames over path.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace sdrf::io
