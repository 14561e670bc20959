#include "cyclebench/core/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "cyclebench/core/error.hpp"

namespace cyclebench {

OptDouble StatisticRollup::get(std::string_view name) const {
  for (auto const& e : entries) {
    if (e.name == name) return e.value;
  }
  return std::nullopt;
}

std::string_view ProjectStatusName(ProjectStatus s) {
  switch (s) {
    case ProjectStatus::kPending: return "Pending";
    case ProjectStatus::kProcessing: return "Processing";
    case ProjectStatus::kReady: return "Ready";
    case ProjectStatus::kFailed: return "Failed";
  }
  return "Pending";
}

ProjectStatus ParseProjectStatus(std::string_view s) {
  if (s == "Pending") return ProjectStatus::kPending;
  if (s == "Processing") return ProjectStatus::kProcessing;
  if (s == "Ready") return ProjectStatus::kReady;
  if (s == "Failed") return ProjectStatus::kFailed;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown project status '" + std::string(s) + "'");
}

std::string_view ViolationKindName(ViolationKind k) {
  switch (k) {
    case ViolationKind::kEmptyDataset: return "empty-dataset";
    case ViolationKind::kMonotoneIndex: return "monotone-index";
    case ViolationKind::kMonotoneTime: return "monotone-time";
    case ViolationKind::kMonotoneCycle: return "monotone-cycle";
    case ViolationKind::kPositiveVoltage: return "positive-voltage";
    case ViolationKind::kPowerMismatch: return "power-mismatch";
    case ViolationKind::kNegativeAccumulation: return "negative-accumulation";
    case ViolationKind::kNonFinite: return "non-finite";
    case ViolationKind::kExtraDelta: return "extra-delta";
  }
  return "unknown";
}

namespace {

bool Finite(OptDouble const& v) { return !v || std::isfinite(*v); }

}  // namespace

std::vector<Violation> ValidateDataset(CanonicalDataset const& d) {
  std::vector<Violation> out;
  if (d.points.empty()) {
    out.push_back({ViolationKind::kEmptyDataset, 0, "points"});
    return out;
  }
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    auto const& p = d.points[i];
    if (!std::isfinite(p.time) || !std::isfinite(p.voltage) ||
        !std::isfinite(p.current) || !Finite(p.capacity) ||
        !Finite(p.energy) || !Finite(p.power) || !Finite(p.temperature) ||
        !Finite(p.resistance)) {
      out.push_back({ViolationKind::kNonFinite, i, "*"});
    }
    if (i > 0) {
      auto const& prev = d.points[i - 1];
      if (p.index <= prev.index) {
        out.push_back({ViolationKind::kMonotoneIndex, i, "index"});
      }
      if (p.time < prev.time) {
        out.push_back({ViolationKind::kMonotoneTime, i, "time"});
      }
      if (p.cycle_index && prev.cycle_index &&
          *p.cycle_index < *prev.cycle_index) {
        out.push_back({ViolationKind::kMonotoneCycle, i, "cycle_index"});
      }
    }
    if (!(p.voltage > 0.0)) {
      out.push_back({ViolationKind::kPositiveVoltage, i, "voltage"});
    }
    if (p.power) {
      double expected = p.voltage * p.current;
      double scale = std::max(std::abs(expected), std::abs(*p.power));
      if (std::abs(*p.power - expected) > 1e-9 * scale) {
        out.push_back({ViolationKind::kPowerMismatch, i, "power"});
      }
    }
    if (p.capacity && *p.capacity < 0.0) {
      out.push_back({ViolationKind::kNegativeAccumulation, i, "capacity"});
    }
    if (p.energy && *p.energy < 0.0) {
      out.push_back({ViolationKind::kNegativeAccumulation, i, "energy"});
    }
  }
  // Delta rule: consecutive stored entries with the same name differ.
  std::unordered_map<std::string, std::string const*> last;
  for (std::size_t i = 0; i < d.extra.size(); ++i) {
    auto const& e = d.extra[i];
    auto it = last.find(e.name);
    if (it != last.end() && *it->second == e.value) {
      out.push_back({ViolationKind::kExtraDelta, i, e.name});
    }
    last[e.name] = &e.value;
  }
  return out;
}

}  // namespace cyclebench
