#ifndef PLUCASE_CSV_HPP
#define PLUCASE_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace plucase::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by header name; -1 when absent.
  int column(std::string_view name) const;
};

// Parses RFC-4180-style CSV: comma separator, double-quote quoting with
// "" escapes, LF or CRLF line endings. First record is the header.
Table parse(std::string_view content);
Table read_file(const std::string& path);

std::string escape_field(std::string_view field);
std::string write_row(const std::vector<std::string>& fields);

}  // namespace plucase::csv

#endif
