#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace regionflow::io {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> cells;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

// Minimal RFC 4180 reader: comma separated, optional double quotes, a header
// line is required. Blank lines are skipped. Throws ValidationError.
CsvTable read_csv(const std::filesystem::path& path);

double parse_double(std::string_view text, const std::string& context);

// Shortest "%.{digits}g" rendering.
std::string format_double(double value, int significant_digits = 17);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace regionflow::io
