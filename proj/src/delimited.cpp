#include "fairaudit/delimited.hpp"

#include <istream>
#include <ostream>

#include "fairaudit/error.hpp"

namespace fairaudit {
namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

char detect_delimiter(std::string_view line) {
  if (line.find('\t') != std::string_view::npos &&
      line.find(',') == std::string_view::npos) {
    return '\t';
  }
  return ',';
}

DelimitedTable read_impl(std::istream& in, std::string_view source_name, bool has_header) {
  DelimitedTable table;
  std::string line;
  std::size_t line_no = 0;
  bool delimiter_known = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    if (!delimiter_known) {
      table.delimiter = detect_delimiter(line);
      delimiter_known = true;
      if (has_header) {
        table.header = split_record(line, table.delimiter);
        continue;
      }
    }
    table.rows.push_back(split_record(line, table.delimiter));
    table.line_numbers.push_back(line_no);
  }
  if (in.bad()) throw_data("io", std::string("read failure on ") + std::string(source_name));
  if (has_header && table.header.empty()) {
    throw_data("io", std::string(source_name) + ": missing header row");
  }
  return table;
}

}  // namespace

DelimitedTable read_delimited(std::istream& in, std::string_view source_name) {
  return read_impl(in, source_name, true);
}

DelimitedTable read_delimited_records(std::istream& in, std::string_view source_name) {
  return read_impl(in, source_name, false);
}

std::vector<std::string> split_record(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string escape_field(std::string_view field, char delimiter) {
  if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_record(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.put(delimiter);
    out << escape_field(fields[i], delimiter);
  }
  out.put('\n');
}

}  // namespace fairaudit
