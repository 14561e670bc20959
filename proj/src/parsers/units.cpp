#include "cyclebench/parsers/units.hpp"

#include <string>

#include "cyclebench/core/text.hpp"

namespace cyclebench::parsers {

namespace {

struct UnitRow {
  std::string_view label;
  double scale;
  double offset;
};

constexpr UnitRow kTime[] = {
    {"s", 1.0, 0.0}, {"sec", 1.0, 0.0}, {"ms", 1e-3, 0.0},
    {"min", 60.0, 0.0}, {"h", 3600.0, 0.0}, {"hr", 3600.0, 0.0},
};
constexpr UnitRow kVoltage[] = {{"V", 1.0, 0.0}, {"mV", 1e-3, 0.0}};
constexpr UnitRow kCurrent[] = {
    {"A", 1.0, 0.0}, {"mA", 1e-3, 0.0}, {"uA", 1e-6, 0.0}};
constexpr UnitRow kCapacity[] = {
    {"Ah", 1.0, 0.0}, {"mAh", 1e-3, 0.0}, {"mA.h", 1e-3, 0.0},
    {"As", 1.0 / 3600.0, 0.0}, {"C", 1.0 / 3600.0, 0.0}};
constexpr UnitRow kEnergy[] = {
    {"Wh", 1.0, 0.0}, {"mWh", 1e-3, 0.0}, {"kWh", 1e3, 0.0},
    {"J", 1.0 / 3600.0, 0.0}};
constexpr UnitRow kPower[] = {{"W", 1.0, 0.0}, {"mW", 1e-3, 0.0}, {"kW", 1e3, 0.0}};
constexpr UnitRow kTemperature[] = {
    {"degC", 1.0, 0.0}, {"C", 1.0, 0.0}, {"\xC2\xB0" "C", 1.0, 0.0},
    {"K", 1.0, -273.15}, {"degF", 5.0 / 9.0, -32.0 * 5.0 / 9.0}};
constexpr UnitRow kResistance[] = {
    {"Ohm", 1.0, 0.0}, {"ohm", 1.0, 0.0}, {"mOhm", 1e-3, 0.0}};
// 0-based source counters are shifted onto the 1-based convention.
constexpr UnitRow kOrdinal[] = {{"1", 1.0, 0.0}, {"index1", 1.0, 0.0},
                                {"index0", 1.0, 1.0}};

template <std::size_t N>
std::optional<UnitConversion> Find(UnitRow const (&rows)[N], std::string_view l) {
  for (auto const& r : rows) {
    if (r.label == l) return UnitConversion{r.scale, r.offset, false};
  }
  return std::nullopt;
}

}  // namespace

std::optional<UnitConversion> LookupUnit(PointField field, std::string_view label) {
  switch (field) {
    case PointField::kTime:
      if (label == "hms") return UnitConversion{1.0, 0.0, true};
      return Find(kTime, label);
    case PointField::kVoltage: return Find(kVoltage, label);
    case PointField::kCurrent: return Find(kCurrent, label);
    case PointField::kCapacity: return Find(kCapacity, label);
    case PointField::kEnergy: return Find(kEnergy, label);
    case PointField::kPower: return Find(kPower, label);
    case PointField::kTemperature: return Find(kTemperature, label);
    case PointField::kResistance: return Find(kResistance, label);
    case PointField::kCycleIndex:
    case PointField::kStepIndex:
    case PointField::kCycleStep: return Find(kOrdinal, label);
    case PointField::kWallTime: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view CanonicalUnit(PointField field) {
  switch (field) {
    case PointField::kTime: return "s";
    case PointField::kWallTime: return "iso8601";
    case PointField::kVoltage: return "V";
    case PointField::kCurrent: return "A";
    case PointField::kCapacity: return "Ah";
    case PointField::kEnergy: return "Wh";
    case PointField::kPower: return "W";
    case PointField::kTemperature: return "degC";
    case PointField::kResistance: return "Ohm";
    default: return "1";
  }
}

std::optional<double> ParseDuration(std::string_view s, char decimal) {
  s = text::Trim(s);
  if (s.empty()) return std::nullopt;
  double days = 0.0;
  auto dpos = s.find('d');
  if (dpos != std::string_view::npos) {
    auto d = text::ParseInt(s.substr(0, dpos));
    if (!d || *d < 0) return std::nullopt;
    days = static_cast<double>(*d);
    s = text::Trim(s.substr(dpos + 1));
  }
  auto parts = text::Split(s, ':');
  if (parts.size() != 3) return std::nullopt;
  auto h = text::ParseInt(parts[0]);
  auto m = text::ParseInt(parts[1]);
  auto sec = text::ParseDouble(parts[2], decimal);
  if (!h || !m || !sec || *h < 0 || *m < 0 || *m > 59 || *sec < 0.0 ||
      *sec >= 60.0) {
    return std::nullopt;
  }
  return days * 86400.0 + static_cast<double>(*h) * 3600.0 +
         static_cast<double>(*m) * 60.0 + *sec;
}

}  // namespace cyclebench::parsers
