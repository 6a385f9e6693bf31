#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace socev {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Strict parse of a whole field; throws std::invalid_argument otherwise.
double parse_number(std::string_view text);
long long parse_integer(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name, or throws std::invalid_argument naming the column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends. The first
/// record is the header; blank lines are skipped.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace socev
