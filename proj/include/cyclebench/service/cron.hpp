#pragma once

#include <bitset>
#include <chrono>
#include <ctime>
#include <string>

namespace cyclebench::service {

// Five-field cron expression (minute hour day-of-month month day-of-week)
// with lists, ranges and steps, evaluated in local time. Day-of-week 0 and
// 7 are both Sunday. When both day fields are restricted a day matches
// either one. Also accepts @hourly, @daily and @weekly.
class CronSchedule {
 public:
  using TimePoint = std::chrono::system_clock::time_point;

  // Throws InvalidArgument.
  static CronSchedule Parse(std::string const& expr);

  bool Matches(std::tm const& local) const;
  // First matching minute strictly after t. Throws InvalidArgument if none
  // exists within five years (e.g. "0 0 31 2 *").
  TimePoint Next(TimePoint t) const;

  std::string const& expression() const { return expr_; }

 private:
  std::string expr_;
  std::bitset<60> minute_;
  std::bitset<24> hour_;
  std::bitset<32> dom_;
  std::bitset<13> month_;
  std::bitset<7> dow_;
  bool dom_any_ = true;
  bool dow_any_ = true;
};

}  // namespace cyclebench::service
