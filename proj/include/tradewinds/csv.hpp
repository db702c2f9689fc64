#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tradewinds::csv {

struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based file line of each data row (headers and blank lines counted).
  std::vector<std::size_t> row_lines;

  std::optional<std::size_t> column(const std::string& name) const;
};

/// Reads a comma-separated file with a header row. Quoted fields may contain
/// commas, doubled quotes, and newlines. Reads at most max_rows data rows
/// when given. Throws ParseError when the file cannot be opened or a row has
/// the wrong field count.
Table read_file(const std::string& path,
                std::optional<std::size_t> max_rows = std::nullopt);

/// Field quoting for writers.
std::string escape(const std::string& field);

/// Shortest decimal form that round-trips a double through parsing.
std::string format_double(double v);

/// Locale-independent double parser; rejects trailing junk.
std::optional<double> parse_double(const std::string& field);

std::optional<long long> parse_int(const std::string& field);

}  // namespace tradewinds::csv
