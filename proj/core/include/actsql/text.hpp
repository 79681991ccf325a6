#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace actsql::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Collapses every run of whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool iequals(std::string_view a, std::string_view b);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Replaces '_' with ' ' and lowercases; the readable form used for matching
// schema item names against question text.
std::string readable(std::string_view s);

// Shortest decimal rendering of a double that parses back to the same value,
// fixed notation, with ".0" appended when there is no fractional part.
std::string render_real(double v);

}  // namespace actsql::text
