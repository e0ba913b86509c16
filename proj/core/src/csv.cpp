#include "polylab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "polylab/error.hpp"

namespace polylab {
namespace {

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render_cell(const CsvCell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return quote_if_needed(std::get<std::string>(cell));
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (result.ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buffer, result.ptr);
}

std::string render_csv(const CsvTable& table) {
  std::string out;
  for (const auto& comment : table.comments) {
    if (comment.find_first_of("\r\n") != std::string::npos) {
      throw InvalidArgument("CSV comment lines must not contain line breaks");
    }
    out += "# " + comment + "\n";
  }
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += quote_if_needed(table.header[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw InvalidArgument("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += render_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target = path.has_parent_path() ? path : fs::path(".") / path;
  const fs::path temp = target.parent_path() /
                        ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + temp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(temp);
      throw std::runtime_error("failed writing " + temp.string());
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp);
    throw std::runtime_error("cannot move output into place at " + target.string() + ": " + ec.message());
  }
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  write_atomically(path, render_csv(table));
}

}  // namespace polylab
