#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace demandcast::text {

/// Splits `bytes` into lines, accepting LF or CRLF endings. A trailing empty line is dropped.
std::vector<std::string_view> lines(std::string_view bytes);

std::vector<std::string_view> split(std::string_view line, char delim = ',');

std::string_view trim(std::string_view s);

/// Strict full-field double parse; throws FormatError tagged with `line`.
double parse_double(std::string_view field, std::size_t line, std::string_view what);
long long parse_int(std::string_view field, std::size_t line, std::string_view what);

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

}  // namespace demandcast::text
