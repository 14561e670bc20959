#include "cyclebench/service/cron.hpp"

#include <ctime>
#include <vector>

#include "cyclebench/core/error.hpp"
#include "cyclebench/core/text.hpp"

namespace cyclebench::service {

namespace {

// Fills bits [lo, hi] of the field from one comma-separated element. Returns
// false if the field is a bare "*".
template <std::size_t N>
bool ParseField(std::string const& field, int lo, int hi, std::bitset<N>& out, char const* what) {
  auto fail = [&](std::string const& why) {
    return Error(ErrorCode::kInvalidArgument,
                 std::string("cron ") + what + " field '" + field + "': " + why);
  };
  auto number = [&](std::string_view s) {
    auto v = text::ParseInt(s);
    if (!v || *v < lo || *v > hi) throw fail("value out of range");
    return static_cast<int>(*v);
  };
  for (auto const& part : text::Split(field, ',')) {
    if (part.empty()) throw fail("empty list element");
    std::string range = part;
    int step = 1;
    if (auto slash = part.find('/'); slash != std::string::npos) {
      auto v = text::ParseInt(std::string_view(part).substr(slash + 1));
      if (!v || *v < 1) throw fail("bad step");
      step = static_cast<int>(*v);
      range = part.substr(0, slash);
    }
    int a = lo;
    int b = hi;
    if (range != "*") {
      if (auto dash = range.find('-'); dash != std::string::npos) {
        a = number(std::string_view(range).substr(0, dash));
        b = number(std::string_view(range).substr(dash + 1));
        if (a > b) throw fail("descending range");
      } else {
        a = number(range);
        b = step > 1 ? hi : a;
      }
    }
    for (int v = a; v <= b; v += step) out.set(static_cast<std::size_t>(v));
  }
  return field != "*";
}

}  // namespace

CronSchedule CronSchedule::Parse(std::string const& expr) {
  std::string e(text::Trim(expr));
  if (e == "@hourly") e = "0 * * * *";
  if (e == "@daily") e = "0 0 * * *";
  if (e == "@weekly") e = "0 0 * * 0";
  std::vector<std::string> fields;
  for (auto const& f : text::Split(e, ' ')) {
    if (!f.empty()) fields.push_back(f);
  }
  if (fields.size() != 5) {
    throw Error(ErrorCode::kInvalidArgument, "cron expression needs 5 fields: '" + expr + "'");
  }
  CronSchedule s;
  s.expr_ = expr;
  ParseField(fields[0], 0, 59, s.minute_, "minute");
  ParseField(fields[1], 0, 23, s.hour_, "hour");
  s.dom_any_ = !ParseField(fields[2], 1, 31, s.dom_, "day-of-month");
  ParseField(fields[3], 1, 12, s.month_, "month");
  std::bitset<8> dow;
  s.dow_any_ = !ParseField(fields[4], 0, 7, dow, "day-of-week");
  for (std::size_t d = 0; d < 7; ++d) s.dow_[d] = dow[d];
  if (dow[7]) s.dow_.set(0);
  return s;
}

bool CronSchedule::Matches(std::tm const& t) const {
  if (!minute_[static_cast<std::size_t>(t.tm_min)] || !hour_[static_cast<std::size_t>(t.tm_hour)] ||
      !month_[static_cast<std::size_t>(t.tm_mon + 1)]) {
    return false;
  }
  bool const dom = dom_[static_cast<std::size_t>(t.tm_mday)];
  bool const dow = dow_[static_cast<std::size_t>(t.tm_wday)];
  if (dom_any_ && dow_any_) return true;
  if (dom_any_) return dow;
  if (dow_any_) return dom;
  return dom || dow;
}

CronSchedule::TimePoint CronSchedule::Next(TimePoint t) const {
  using namespace std::chrono;
  auto m = floor<minutes>(t) + minutes(1);
  constexpr int kLimit = 5 * 366 * 24 * 60;
  for (int k = 0; k < kLimit; ++k, m += minutes(1)) {
    std::time_t tt = system_clock::to_time_t(m);
    std::tm local{};
    localtime_r(&tt, &local);
    if (Matches(local)) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "cron expression never fires: '" + expr_ + "'");
}

}  // namespace cyclebench::service
