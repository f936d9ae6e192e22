#ifndef MASER_TEXT_HPP
#define MASER_TEXT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace maser::io {

/// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

/// Strict conversion of the whole field; throws ParseError naming source:line.
double parse_double(std::string_view field, const std::string& source, int line);

std::string_view trim(std::string_view s);

/// Splits on `delim` and trims every field.
std::vector<std::string> split_fields(std::string_view line, char delim = ',');

} // namespace maser::io

#endif
