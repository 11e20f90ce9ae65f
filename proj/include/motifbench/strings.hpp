#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace motifbench {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
// Splits on runs of ASCII whitespace; never yields empty tokens.
std::vector<std::string_view> split_whitespace(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Whole-string parses; nullopt on any trailing garbage.
std::optional<std::int64_t> parse_int64(std::string_view s);
std::optional<std::uint64_t> parse_uint64(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// Shortest decimal form that round-trips to the same binary64.
std::string format_double(double v);

}  // namespace motifbench
