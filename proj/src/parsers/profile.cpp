#include "cyclebench/parsers/profile.hpp"

#include <algorithm>
#include <regex>

#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/parsers/units.hpp"

namespace cyclebench::parsers {

namespace {

#include "builtin_profiles.inc"

using Json = nlohmann::ordered_json;

struct FieldName {
  PointField field;
  std::string_view name;
};

constexpr FieldName kFieldNames[] = {
    {PointField::kTime, "time"},
    {PointField::kWallTime, "wall_time"},
    {PointField::kVoltage, "voltage"},
    {PointField::kCurrent, "current"},
    {PointField::kCapacity, "capacity"},
    {PointField::kEnergy, "energy"},
    {PointField::kPower, "power"},
    {PointField::kTemperature, "temperature"},
    {PointField::kResistance, "resistance"},
    {PointField::kCycleIndex, "cycle_index"},
    {PointField::kStepIndex, "step_index"},
    {PointField::kCycleStep, "cycle_step"},
};

[[noreturn]] void Invalid(VendorProfile const& p, std::string const& why) {
  throw Error(ErrorCode::kInvalidProfile,
              (p.format_id.empty() ? std::string("<unnamed>") : p.format_id) +
                  ": " + why);
}

char SingleChar(Json const& j, char const* key, char fallback) {
  if (!j.contains(key)) return fallback;
  auto s = j[key].get<std::string>();
  if (s.size() != 1) {
    throw Error(ErrorCode::kInvalidProfile,
                std::string(key) + " must be a single character");
  }
  return s[0];
}

}  // namespace

std::string_view PointFieldName(PointField f) {
  for (auto const& fn : kFieldNames) {
    if (fn.field == f) return fn.name;
  }
  return "?";
}

std::optional<PointField> ParsePointField(std::string_view name) {
  for (auto const& fn : kFieldNames) {
    if (fn.name == name) return fn.field;
  }
  return std::nullopt;
}

bool IsRequired(PointField f) {
  return f == PointField::kTime || f == PointField::kVoltage ||
         f == PointField::kCurrent;
}

bool IsOrdinal(PointField f) {
  return f == PointField::kCycleIndex || f == PointField::kStepIndex ||
         f == PointField::kCycleStep;
}

ColumnMapping const* VendorProfile::FindMapping(PointField f) const {
  for (auto const& c : columns) {
    if (c.field == f) return &c;
  }
  return nullptr;
}

void ValidateProfile(VendorProfile const& p) {
  if (p.format_id.empty()) Invalid(p, "format_id is empty");
  if (p.columns.empty()) Invalid(p, "column_map is empty");
  for (auto f : {PointField::kTime, PointField::kVoltage, PointField::kCurrent}) {
    if (p.FindMapping(f) == nullptr) {
      Invalid(p, "column_map does not cover " + std::string(PointFieldName(f)));
    }
  }
  for (std::size_t i = 0; i < p.columns.size(); ++i) {
    auto const& c = p.columns[i];
    if (c.source.empty()) Invalid(p, "empty source column label");
    for (std::size_t k = 0; k < i; ++k) {
      if (p.columns[k].field == c.field) {
        Invalid(p, "field " + std::string(PointFieldName(c.field)) +
                       " mapped twice");
      }
      if (p.columns[k].source == c.source) {
        Invalid(p, "column " + c.source + " mapped twice");
      }
    }
    if (c.field != PointField::kWallTime && !LookupUnit(c.field, c.unit)) {
      Invalid(p, "unit '" + c.unit + "' is not valid for " +
                     std::string(PointFieldName(c.field)));
    }
  }
  if (p.filename_pattern.empty()) Invalid(p, "match.filename is empty");
  try {
    std::regex re(p.filename_pattern, std::regex::ECMAScript | std::regex::icase);
    if (!p.header_locator.empty()) std::regex loc(p.header_locator);
  } catch (std::regex_error const& e) {
    Invalid(p, std::string("bad regex: ") + e.what());
  }
  if (p.delimiter == p.decimal_separator) {
    Invalid(p, "delimiter equals decimal separator");
  }
  if (p.delimiter == '"' || p.delimiter == '\n' || p.delimiter == '\r') {
    Invalid(p, "unsupported delimiter");
  }
  if (p.header_row_count < 0) Invalid(p, "negative header_row_count");
  if (p.channel_source == ChannelSource::kColumn && p.channel_column.empty()) {
    Invalid(p, "channel column not named");
  }
  if (p.current_sign && p.current_sign->column.empty()) {
    Invalid(p, "current_sign column not named");
  }
}

Json ProfileToJson(VendorProfile const& p) {
  Json j;
  j["format_id"] = p.format_id;
  j["description"] = p.description;
  j["match"] = {{"filename", p.filename_pattern},
                {"header_contains", p.header_contains}};
  j["delimiter"] = std::string(1, p.delimiter);
  j["decimal_separator"] = std::string(1, p.decimal_separator);
  j["header_row_count"] = p.header_row_count;
  if (!p.header_locator.empty()) j["header_locator"] = p.header_locator;
  Json ch;
  switch (p.channel_source) {
    case ChannelSource::kColumn:
      ch["source"] = "column";
      ch["column"] = p.channel_column;
      break;
    case ChannelSource::kFileExtension:
      ch["source"] = "file_extension";
      ch["fixed"] = p.fixed_channel;
      break;
    case ChannelSource::kFixed:
      ch["source"] = "fixed";
      ch["fixed"] = p.fixed_channel;
      break;
  }
  j["channel"] = ch;
  Json cols = Json::array();
  for (auto const& c : p.columns) {
    cols.push_back({{"source", c.source},
                    {"field", std::string(PointFieldName(c.field))},
                    {"unit", c.unit}});
  }
  j["columns"] = cols;
  j["ignore"] = p.ignore_columns;
  if (p.current_sign) {
    j["current_sign"] = {{"column", p.current_sign->column},
                         {"charge", p.current_sign->charge},
                         {"discharge", p.current_sign->discharge}};
  }
  return j;
}

VendorProfile ProfileFromJson(Json const& j) {
  VendorProfile p;
  try {
    p.format_id = j.at("format_id").get<std::string>();
    p.description = j.value("description", "");
    auto const& m = j.at("match");
    p.filename_pattern = m.at("filename").get<std::string>();
    if (m.contains("header_contains")) {
      p.header_contains = m["header_contains"].get<std::vector<std::string>>();
    }
    p.delimiter = SingleChar(j, "delimiter", ',');
    p.decimal_separator = SingleChar(j, "decimal_separator", '.');
    p.header_row_count = j.value("header_row_count", 0);
    p.header_locator = j.value("header_locator", "");
    if (j.contains("channel")) {
      auto const& ch = j["channel"];
      auto src = ch.value("source", "fixed");
      if (src == "column") {
        p.channel_source = ChannelSource::kColumn;
        p.channel_column = ch.value("column", "");
      } else if (src == "file_extension") {
        p.channel_source = ChannelSource::kFileExtension;
      } else if (src == "fixed") {
        p.channel_source = ChannelSource::kFixed;
      } else {
        throw Error(ErrorCode::kInvalidProfile, "unknown channel source " + src);
      }
      p.fixed_channel = ch.value("fixed", std::int64_t{1});
    }
    if (j.contains("columns")) {
      for (auto const& c : j["columns"]) {
        auto field_name = c.at("field").get<std::string>();
        auto field = ParsePointField(field_name);
        if (!field) {
          throw Error(ErrorCode::kInvalidProfile,
                      p.format_id + ": unknown field " + field_name);
        }
        p.columns.push_back(
            {c.at("source").get<std::string>(), *field, c.value("unit", "")});
      }
    }
    if (j.contains("ignore")) {
      p.ignore_columns = j["ignore"].get<std::vector<std::string>>();
    }
    if (j.contains("current_sign")) {
      auto const& s = j["current_sign"];
      p.current_sign = CurrentSignRule{
          s.at("column").get<std::string>(),
          s.value("charge", std::vector<std::string>{}),
          s.value("discharge", std::vector<std::string>{})};
    }
  } catch (nlohmann::json::exception const& e) {
    throw Error(ErrorCode::kInvalidProfile,
                (p.format_id.empty() ? std::string("profile") : p.format_id) +
                    ": " + e.what());
  }
  return p;
}

std::vector<VendorProfile> LoadProfilesDir(std::filesystem::path const& dir) {
  std::vector<std::filesystem::path> files;
  for (auto const& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<VendorProfile> out;
  for (auto const& f : files) {
    Json j;
    try {
      j = Json::parse(serialize::ReadFile(f));
    } catch (nlohmann::json::exception const& e) {
      throw Error(ErrorCode::kInvalidProfile, f.string() + ": " + e.what());
    }
    auto p = ProfileFromJson(j);
    ValidateProfile(p);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<VendorProfile> BuiltinProfiles() {
  std::vector<VendorProfile> out;
  for (auto text : kBuiltinProfileJson) {
    auto p = ProfileFromJson(Json::parse(text));
    ValidateProfile(p);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cyclebench::parsers
