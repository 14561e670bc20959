#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cyclebench::parsers {

// DataPoint fields a vendor column can feed. `index` is always assigned by
// the normalizer and is not mappable.
enum class PointField {
  kTime,
  kWallTime,
  kVoltage,
  kCurrent,
  kCapacity,
  kEnergy,
  kPower,
  kTemperature,
  kResistance,
  kCycleIndex,
  kStepIndex,
  kCycleStep,
};

std::string_view PointFieldName(PointField f);
std::optional<PointField> ParsePointField(std::string_view name);
bool IsRequired(PointField f);
bool IsOrdinal(PointField f);

enum class ChannelSource { kColumn, kFileExtension, kFixed };

struct ColumnMapping {
  std::string source;  // column label as it appears in the file
  PointField field;
  std::string unit;    // unit label, or strptime format for wall_time
};

// Vendors that log unsigned current plus a state column.
struct CurrentSignRule {
  std::string column;
  std::vector<std::string> charge;
  std::vector<std::string> discharge;
};

struct VendorProfile {
  std::string format_id;
  std::string description;
  // Case-insensitive ECMAScript regex searched in the file name.
  std::string filename_pattern;
  // Every string must occur in the first 4096 bytes.
  std::vector<std::string> header_contains;
  std::vector<ColumnMapping> columns;
  std::vector<std::string> ignore_columns;
  char delimiter = ',';
  char decimal_separator = '.';
  // Lines preceding the column-label row.
  int header_row_count = 0;
  // When set, the label row is the first line at or after header_row_count
  // matching this regex.
  std::string header_locator;
  ChannelSource channel_source = ChannelSource::kFixed;
  std::string channel_column;
  std::int64_t fixed_channel = 1;
  std::optional<CurrentSignRule> current_sign;

  ColumnMapping const* FindMapping(PointField f) const;
};

// Throws Error(kInvalidProfile) describing the first problem found.
void ValidateProfile(VendorProfile const& p);

nlohmann::ordered_json ProfileToJson(VendorProfile const& p);
VendorProfile ProfileFromJson(nlohmann::ordered_json const& j);

// Every *.json file in the directory, sorted by file name.
std::vector<VendorProfile> LoadProfilesDir(std::filesystem::path const& dir);

// Reference profiles for the delimited-text exports.
std::vector<VendorProfile> BuiltinProfiles();

}  // namespace cyclebench::parsers
