#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cogtrace::text {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// RFC 4180 quoting when needed.
std::string csv_field(std::string_view s);
std::vector<std::string> parse_csv_line(std::string_view line);

std::uint64_t fnv1a(std::string_view s);

}  // namespace cogtrace::text
