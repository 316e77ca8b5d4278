#include "ncci/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "ncci/error.hpp"

namespace ncci::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
  if (auto idx = column(name)) return *idx;
  throw InputError("CSV is missing required column '" + std::string(name) + "'");
}

namespace {

// Reads one logical record. Returns false at end of input. `line` is advanced
// by the number of physical lines consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  ++line;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw InputError("CSV line " + std::to_string(line) + ": unterminated quoted field");
  }
  fields.push_back(std::move(field));
  return any;
}

bool blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

}  // namespace

Table parse(std::istream& in) {
  Table table;
  std::vector<std::string> fields;
  std::size_t line = 0;
  bool have_header = false;
  while (true) {
    if (!have_header && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      ++line;
      if (!comment.empty() && comment.back() == '\r') comment.pop_back();
      table.comments.push_back(comment);
      continue;
    }
    const std::size_t start = line + 1;
    if (!read_record(in, fields, line)) break;
    if (blank(fields)) continue;
    if (!have_header) {
      // strip a UTF-8 byte order mark
      if (!fields[0].empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      table.header = fields;
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InputError("CSV line " + std::to_string(start) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(fields);
    table.line_numbers.push_back(start);
  }
  if (!have_header) throw InputError("CSV input has no header row");
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open CSV file", path);
  try {
    return parse(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace ncci::csv
