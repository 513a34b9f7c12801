#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rinkfx {

/// Minimal comma-delimited table I/O. Fields are written verbatim; none of
/// the formats in this project put commas, quotes or newlines inside a field.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line);

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Shortest decimal form that parses back to exactly the same double.
std::string fmt_double(double value);

/// Fixed-point with the given number of decimals.
std::string fmt_fixed(double value, int decimals);

}  // namespace rinkfx
