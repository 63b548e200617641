#include "csv.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "sdid/error.hpp"

namespace sdid::cli {

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    std::string have;
    for (const auto& h : header) have += (have.empty() ? "" : ", ") + h;
    throw DataError("missing column '" + name + "' (columns present: " + have + ")");
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

// Reads one record; returns false at end of input. Quoted fields may span
// lines.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool was_quoted = false;
  char c = 0;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": stray quote inside unquoted field");
      }
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') continue;
      break;
    } else if (c == '\n') {
      break;
    } else {
      if (was_quoted) {
        throw DataError("line " + std::to_string(line_no) + ": text after closing quote");
      }
      field += c;
    }
  }
  if (in_quotes) throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
  if (!any) return false;
  fields.push_back(std::move(field));
  ++line_no;
  return true;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::size_t line_no = 1;
  std::vector<std::string> fields;
  if (!read_record(in, fields, line_no)) throw DataError("CSV input is empty (header required)");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  table.header = fields;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (table.header[i] == table.header[j]) {
        throw DataError("duplicate column '" + table.header[i] + "' in CSV header");
      }
    }
  }
  while (true) {
    const std::size_t record_line = line_no;
    if (!read_record(in, fields, line_no)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header.size()) {
      throw DataError("line " + std::to_string(record_line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return read_csv(in);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

}  // namespace sdid::cli
