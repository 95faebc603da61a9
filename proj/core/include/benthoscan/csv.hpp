#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace benthoscan {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based file line of each row, for error reporting.
  std::vector<std::size_t> line_numbers;
};

// RFC-4180-ish reader: comma separated, optional double quotes, "" escapes a
// quote inside a quoted field. Fields may not span lines. A header row is
// required; blank lines are skipped.
CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line,
                                        std::size_t line_number);

// Quotes a field when it contains a comma, a quote or whitespace at the ends.
std::string csv_escape(const std::string& field);

}  // namespace benthoscan
