#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

/// Minimal delimited-text support for the tabular file formats. Fields may be
/// double-quoted (RFC 4180 style); records end at newlines, CR is stripped.
struct DelimitedTable {
  char delimiter = ',';
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> line_numbers;
};

/// Reads a table with a header row. The delimiter is ',' unless the header
/// contains a tab and no comma. Blank lines are skipped.
DelimitedTable read_delimited(std::istream& in, std::string_view source_name);

/// Reads headerless records (first line is data).
DelimitedTable read_delimited_records(std::istream& in, std::string_view source_name);

std::vector<std::string> split_record(std::string_view line, char delimiter);

/// Quotes a field when it contains the delimiter, a quote, or a newline.
std::string escape_field(std::string_view field, char delimiter = ',');

void write_record(std::ostream& out, const std::vector<std::string>& fields,
                  char delimiter = ',');

}  // namespace fairaudit
