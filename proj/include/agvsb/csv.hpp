#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agvsb::csv {

/// Splits one CSV record. Handles double-quoted fields with "" escapes; does
/// not handle records spanning lines.
std::vector<std::string> split(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Shortest representation that parses back to the same double.
std::string shortest(double v);

/// Fixed-point with `digits` decimals, as used in report tables.
std::string fixed(double v, int digits);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string trim(std::string_view s);
/// Lowercase with everything but [a-z0-9] removed; used for header matching.
std::string normalize_key(std::string_view s);

}  // namespace agvsb::csv
