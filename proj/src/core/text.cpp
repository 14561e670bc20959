#include "cyclebench/core/text.hpp"

#include <time.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace cyclebench::text {

std::string FormatDouble(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::string_view Trim(std::string_view s) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> ParseDouble(std::string_view s, char decimal) {
  s = Trim(s);
  if (s.empty()) return std::nullopt;
  std::string tmp;
  if (decimal != '.' || s.front() == '+') {
    tmp.assign(s);
    if (decimal != '.') std::replace(tmp.begin(), tmp.end(), decimal, '.');
    if (!tmp.empty() && tmp.front() == '+') tmp.erase(0, 1);
    s = tmp;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> ParseInt(std::string_view s) {
  s = Trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

namespace {

// Proleptic Gregorian day count relative to 1970-01-01.
std::int64_t DaysFromCivil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  std::int64_t const era = (y >= 0 ? y : y - 399) / 400;
  auto const yoe = static_cast<unsigned>(y - era * 400);
  unsigned const doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  unsigned const doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void CivilFromDays(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  std::int64_t const era = (z >= 0 ? z : z - 146096) / 146097;
  auto const doe = static_cast<unsigned>(z - era * 146097);
  unsigned const yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  unsigned const doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned const mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

Timestamp FromFields(std::int64_t y, unsigned mo, unsigned d, int h, int mi,
                     int s, std::int64_t ms) {
  std::int64_t days = DaysFromCivil(y, mo, d);
  std::int64_t total =
      ((days * 24 + h) * 60 + mi) * 60 * 1000 + std::int64_t{s} * 1000 + ms;
  return Timestamp(std::chrono::milliseconds(total));
}

// Reads ".ddd..." into milliseconds; advances p.
std::int64_t ReadFraction(char const*& p, char const* end) {
  if (p == end || (*p != '.' && *p != ',')) return 0;
  ++p;
  std::int64_t ms = 0;
  int digits = 0;
  while (p != end && std::isdigit(static_cast<unsigned char>(*p))) {
    if (digits < 3) ms = ms * 10 + (*p - '0');
    ++digits;
    ++p;
  }
  for (; digits < 3; ++digits) ms *= 10;
  return ms;
}

}  // namespace

Timestamp FromUnixSeconds(std::int64_t secs) {
  return Timestamp(std::chrono::milliseconds(secs * 1000));
}

std::int64_t ToUnixSeconds(Timestamp t) {
  return std::chrono::floor<std::chrono::seconds>(t.time_since_epoch()).count();
}

std::string FormatTimestamp(Timestamp t) {
  std::int64_t ms = t.time_since_epoch().count();
  std::int64_t days = ms >= 0 ? ms / 86400000 : (ms - 86399999) / 86400000;
  std::int64_t rem = ms - days * 86400000;
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  CivilFromDays(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600000),
                static_cast<long long>(rem / 60000 % 60),
                static_cast<long long>(rem / 1000 % 60),
                static_cast<long long>(rem % 1000));
  return buf;
}

std::optional<Timestamp> ParseTimestamp(std::string_view s) {
  s = Trim(s);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  int consumed = 0;
  std::string tmp(s);
  if (std::sscanf(tmp.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep,
                  &h, &mi, &sec, &consumed) != 7) {
    return std::nullopt;
  }
  if (sep != 'T' && sep != ' ') return std::nullopt;
  char const* p = tmp.c_str() + consumed;
  char const* end = tmp.c_str() + tmp.size();
  std::int64_t ms = ReadFraction(p, end);
  if (p != end && *p == 'Z') ++p;
  if (p != end) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) {
    return std::nullopt;
  }
  return FromFields(y, mo, d, h, mi, sec, ms);
}

std::optional<Timestamp> ParseTimestamp(std::string_view s,
                                        std::string const& format) {
  if (format.empty() || format == "iso8601") return ParseTimestamp(s);
  std::string tmp(Trim(s));
  std::tm tm{};
  char const* p = ::strptime(tmp.c_str(), format.c_str(), &tm);
  if (p == nullptr) return std::nullopt;
  char const* end = tmp.c_str() + tmp.size();
  std::int64_t ms = ReadFraction(p, end);
  if (p != end) return std::nullopt;
  return FromFields(tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1),
                    static_cast<unsigned>(tm.tm_mday), tm.tm_hour, tm.tm_min,
                    tm.tm_sec, ms);
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ContainsIgnoreCase(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  return ToLower(haystack).find(ToLower(needle)) != std::string::npos;
}

std::vector<std::string> Split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace cyclebench::text
