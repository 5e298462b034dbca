#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netsem {

// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);

// Fixed notation with four decimals, "n/a" for an absent value.
std::string format_fixed4(std::optional<double> value);

// Strict full-string parse; rejects trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);

}  // namespace netsem
