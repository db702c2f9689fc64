#include "tradewinds/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tradewinds/errors.hpp"

namespace tradewinds::csv {

std::optional<std::size_t> Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return c;
  return std::nullopt;
}

namespace {

// One record, honoring quotes (which may hide commas and newlines).
// Returns false at end of stream with nothing read.
bool read_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t& line, std::size_t& record_line) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  record_line = line + 1;

  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line;
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  ++line;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

bool blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

}  // namespace

Table read_file(const std::string& path, std::optional<std::size_t> max_rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);

  Table table;
  table.path = path;
  std::size_t line = 0, record_line = 0;
  std::vector<std::string> fields;
  if (!read_record(in, fields, line, record_line) || blank(fields))
    throw ParseError(path + ": missing header row");
  table.header = fields;

  while (read_record(in, fields, line, record_line)) {
    if (blank(fields)) continue;
    if (fields.size() != table.header.size())
      throw ParseError(path + " line " + std::to_string(record_line) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    table.rows.push_back(fields);
    table.row_lines.push_back(record_line);
    if (max_rows && table.rows.size() >= *max_rows) break;
  }
  return table;
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  // %.17g always round-trips; prefer the shorter forms when they do too
  char buf[40];
  for (int prec : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    (void)ptr;
    if (ec == std::errc() && back == v) break;
  }
  return buf;
}

std::optional<double> parse_double(const std::string& field) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin == end) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(const std::string& field) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin == end) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace tradewinds::csv
