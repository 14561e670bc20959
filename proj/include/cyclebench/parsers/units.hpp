#pragma once

#include <optional>
#include <string_view>

#include "cyclebench/parsers/profile.hpp"

namespace cyclebench::parsers {

// canonical = raw * scale + offset
struct UnitConversion {
  double scale = 1.0;
  double offset = 0.0;
  bool duration_text = false;  // "[Nd ]HH:MM:SS[.fff]" durations
};

// nullopt when the label is not a known unit for the field's dimension.
// wall_time units are strptime formats and are not handled here.
std::optional<UnitConversion> LookupUnit(PointField field, std::string_view label);

std::string_view CanonicalUnit(PointField field);

// Parses "[Nd ]HH:MM:SS[.fff]" (hours may exceed 24) into seconds.
std::optional<double> ParseDuration(std::string_view s, char decimal = '.');

}  // namespace cyclebench::parsers
