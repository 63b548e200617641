#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdid::cli {

/// RFC 4180 style table: a required header row, comma separated, fields
/// optionally double-quoted with "" as the escaped quote. CRLF or LF line
/// endings; a UTF-8 byte-order mark on the first line is skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or DataError naming the missing column.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace sdid::cli
