#include "cpc/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <system_error>

namespace cpc {

std::string format_real(double value) {
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_real failed");
  return std::string(buf, ptr);
}

double parse_real(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) token.remove_suffix(1);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<RealRow> read_real_rows(std::istream& in) {
  std::vector<RealRow> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RealRow row;
    row.line = number;
    for (const auto& field : split_csv_line(line)) {
      try {
        row.values.push_back(parse_real(field));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("row " + std::to_string(number) + ": " + e.what());
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cpc
