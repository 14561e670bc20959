#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclebench/core/model.hpp"

namespace cyclebench::text {

// Shortest decimal text that reads back to the identical double.
std::string FormatDouble(double v);

// Strict parse: the whole (trimmed) field must be consumed. Accepts a
// locale decimal separator in place of '.'.
std::optional<double> ParseDouble(std::string_view s, char decimal = '.');
std::optional<std::int64_t> ParseInt(std::string_view s);

// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string FormatTimestamp(Timestamp t);
// Parses ISO-8601 UTC ("Z" or no zone suffix, optional fraction, 'T' or ' ').
std::optional<Timestamp> ParseTimestamp(std::string_view s);
// strptime-style format interpreted as UTC.
std::optional<Timestamp> ParseTimestamp(std::string_view s,
                                        std::string const& format);
Timestamp FromUnixSeconds(std::int64_t secs);
std::int64_t ToUnixSeconds(Timestamp t);

std::string_view Trim(std::string_view s);
std::string ToLower(std::string_view s);
bool ContainsIgnoreCase(std::string_view haystack, std::string_view needle);
std::vector<std::string> Split(std::string_view s, char sep);

}  // namespace cyclebench::text
