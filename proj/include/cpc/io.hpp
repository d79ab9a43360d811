#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cpc {

/// Shortest decimal form that parses back to the same double.
std::string format_real(double value);

/// Strict parse of a full token; throws std::invalid_argument.
double parse_real(std::string_view token);

std::vector<std::string> split_csv_line(std::string_view line);

/// One parsed CSV row of reals. `line` is 1-based, counting every physical line.
struct RealRow {
  std::size_t line = 0;
  std::vector<double> values;
};

/// Reads numeric rows, skipping blank lines. Throws std::invalid_argument naming
/// the offending line on a non-numeric field.
std::vector<RealRow> read_real_rows(std::istream& in);

}  // namespace cpc
