#include "cyclebench/engine/derive.hpp"

#include <algorithm>
#include <cmath>

namespace cyclebench::engine {

double RestThreshold(CanonicalDataset const& d) {
  double max_abs = 0.0;
  for (auto const& p : d.points) max_abs = std::max(max_abs, std::abs(p.current));
  return std::max(1e-6, 1e-4 * max_abs);
}

std::string_view DerivationFlagName(DerivationFlag f) {
  switch (f) {
    case DerivationFlag::kFromSource: return "FromSource";
    case DerivationFlag::kDerived: return "Derived";
    case DerivationFlag::kAbsent: return "Absent";
  }
  return "Absent";
}

namespace {

template <class Member>
bool AnyPresent(std::vector<DataPoint> const& pts, Member m) {
  return std::any_of(pts.begin(), pts.end(),
                     [m](DataPoint const& p) { return (p.*m).has_value(); });
}

DerivationFlag SourceFlag(bool present) {
  return present ? DerivationFlag::kFromSource : DerivationFlag::kAbsent;
}

}  // namespace

std::pair<CanonicalDataset, DerivationReport> DeriveFields(
    CanonicalDataset const& d, DeriveOptions const& opts) {
  CanonicalDataset out = d;
  DerivationReport report;
  auto& pts = out.points;

  bool const has_capacity = AnyPresent(pts, &DataPoint::capacity);
  bool const has_energy = AnyPresent(pts, &DataPoint::energy);
  bool const has_power = AnyPresent(pts, &DataPoint::power);
  bool const can_derive = !pts.empty();

  report.fields["time"] = SourceFlag(can_derive);
  report.fields["voltage"] = SourceFlag(can_derive);
  report.fields["current"] = SourceFlag(can_derive);
  report.fields["temperature"] = SourceFlag(AnyPresent(pts, &DataPoint::temperature));
  report.fields["resistance"] = SourceFlag(AnyPresent(pts, &DataPoint::resistance));
  report.fields["cycle_index"] = SourceFlag(AnyPresent(pts, &DataPoint::cycle_index));
  report.fields["step_index"] = SourceFlag(AnyPresent(pts, &DataPoint::step_index));
  report.fields["cycle_step"] = SourceFlag(AnyPresent(pts, &DataPoint::cycle_step));
  report.fields["capacity"] = has_capacity ? DerivationFlag::kFromSource
                              : can_derive ? DerivationFlag::kDerived
                                           : DerivationFlag::kAbsent;
  report.fields["energy"] = has_energy ? DerivationFlag::kFromSource
                            : can_derive ? DerivationFlag::kDerived
                                         : DerivationFlag::kAbsent;
  report.fields["power"] = has_power ? DerivationFlag::kFromSource
                           : can_derive ? DerivationFlag::kDerived
                                        : DerivationFlag::kAbsent;
  if (!can_derive) return {std::move(out), std::move(report)};

  double const eps = opts.rest_threshold.value_or(RestThreshold(d));
  double capacity = 0.0;
  double energy = 0.0;
  int half_cycle_sign = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    auto& p = pts[k];
    int const s = ActiveSign(p.current, eps);
    bool reset = k == 0 || (s != 0 && s != half_cycle_sign);
    if (k > 0 && p.cycle_index && pts[k - 1].cycle_index &&
        *p.cycle_index != *pts[k - 1].cycle_index) {
      reset = true;
    }
    if (reset) {
      capacity = 0.0;
      energy = 0.0;
      half_cycle_sign = s;
    } else {
      auto const& q = pts[k - 1];
      double const dt = p.time - q.time;
      capacity += 0.5 * (std::abs(q.current) + std::abs(p.current)) * dt / 3600.0;
      energy += 0.5 *
                (std::abs(q.current * q.voltage) + std::abs(p.current * p.voltage)) *
                dt / 3600.0;
    }
    if (!has_capacity) p.capacity = capacity;
    if (!has_energy) p.energy = energy;
    if (!has_power) p.power = p.voltage * p.current;
  }
  return {std::move(out), std::move(report)};
}

}  // namespace cyclebench::engine
