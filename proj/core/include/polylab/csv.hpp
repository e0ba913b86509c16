#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace polylab {

using CsvCell = std::variant<double, std::int64_t, std::string>;

struct CsvTable {
  std::vector<std::string> comments;  // written as leading "# ..." lines
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

// Shortest representation that parses back to the same double (at most 17
// significant digits), independent of the C/C++ locale.
std::string format_double(double value);

std::string render_csv(const CsvTable& table);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& content);

void emit_csv(const CsvTable& table, const std::filesystem::path& path);

}  // namespace polylab
