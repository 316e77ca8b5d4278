#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ncci::csv {

// A parsed CSV document with a header row. Lines starting with '#' before the
// header are kept as comments (artifacts carry provenance there).
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based source line of each row, for error messages.
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const;
  // Throws InputError naming the missing column.
  std::size_t require_column(std::string_view name) const;
};

// RFC 4180 reader: quoted fields, doubled quotes, embedded commas/newlines.
Table parse(std::istream& in);
Table read_file(const std::string& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest round-trip decimal representation; identical across runs.
std::string format_double(double value);

}  // namespace ncci::csv
