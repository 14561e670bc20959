#include "cyclebench/engine/cycle_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cyclebench/core/columns.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"

namespace cyclebench::engine {

namespace {

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void Add(double x) {
    sum += x;
    ++n;
  }
  OptDouble Get() const {
    return n ? OptDouble(sum / static_cast<double>(n)) : std::nullopt;
  }
};

struct Extremes {
  OptDouble lo;
  OptDouble hi;
  void Add(double x) {
    lo = lo ? std::min(*lo, x) : x;
    hi = hi ? std::max(*hi, x) : x;
  }
};

double Required(OptDouble const& v, char const* field) {
  if (!v) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(field) + " missing; derive fields before computing stats");
  }
  return *v;
}

void CheckSpan(std::optional<IndexSpan> const& span, std::int64_t cycle,
               char const* which) {
  if (span && span->size() < 2) {
    throw Error(ErrorCode::kDegenerateCycle,
                "cycle " + std::to_string(cycle) + " " + which +
                    " span has fewer than 2 points");
  }
}

// (k-1, k) pair inside the span where the current steps out of rest into
// `sign` by more than 10 eps; resistance = dV/dI across it.
OptDouble StepResistance(std::vector<DataPoint> const& pts, IndexSpan span, int sign,
                         double eps) {
  for (std::size_t k = std::max<std::size_t>(span.first, 1); k <= span.last; ++k) {
    auto const& a = pts[k - 1];
    auto const& b = pts[k];
    if (ActiveSign(a.current, eps) != 0 || ActiveSign(b.current, eps) != sign) continue;
    double di = b.current - a.current;
    if (std::abs(di) <= 10.0 * eps) continue;
    return (b.voltage - a.voltage) / di;
  }
  return std::nullopt;
}

OptDouble Ratio(double num, OptDouble den) {
  if (!den || !(*den > 0.0)) return std::nullopt;
  return num / *den;
}

// Running accumulator for one rollup quantity (Welford for the spread).
struct RollupAcc {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double first = 0.0;
  double last = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  void Add(double x) {
    if (n == 0) {
      first = lo = hi = x;
    }
    ++n;
    double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
    last = x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }

  OptDouble Variance() const {
    if (n == 0) return std::nullopt;
    if (n == 1) return 0.0;
    return std::max(0.0, m2 / static_cast<double>(n - 1));
  }

  OptDouble Stat(std::string_view suffix) const {
    if (n == 0) return std::nullopt;
    if (suffix == "Average") return mean;
    if (suffix == "First") return first;
    if (suffix == "Last") return last;
    if (suffix == "Max") return hi;
    if (suffix == "Min") return lo;
    auto var = *Variance();
    if (suffix == "Variance") return var;
    if (suffix == "StdDev") return std::sqrt(var);
    if (suffix == "StdError") return std::sqrt(var) / std::sqrt(static_cast<double>(n));
    return std::nullopt;
  }
};

using Getter = OptDouble (*)(CycleStats const&);

struct Quantity {
  std::string_view base;
  Getter get;
};

constexpr Quantity kQuantities[] = {
    {"ChargeCapacityRetention", [](CycleStats const& c) { return c.charge_capacity_retention; }},
    {"ChargeCapacity", [](CycleStats const& c) { return OptDouble(c.charge_capacity); }},
    {"ChargeEnergy", [](CycleStats const& c) { return OptDouble(c.charge_energy); }},
    {"ChargeVoltage", [](CycleStats const& c) { return c.charge_voltage; }},
    {"CoulombicEfficiency", [](CycleStats const& c) { return c.coulombic_efficiency; }},
    {"DischargeCapacityRetention", [](CycleStats const& c) { return c.discharge_capacity_retention; }},
    {"DischargeCapacity", [](CycleStats const& c) { return OptDouble(c.discharge_capacity); }},
    {"DischargeEndCurrent", [](CycleStats const& c) { return c.discharge_end_current; }},
    {"DischargeEndVoltage", [](CycleStats const& c) { return c.discharge_end_voltage; }},
    {"DischargeEnergy", [](CycleStats const& c) { return OptDouble(c.discharge_energy); }},
    {"DischargePower", [](CycleStats const& c) { return c.discharge_power; }},
    {"DischargeResistance", [](CycleStats const& c) { return c.discharge_resistance; }},
    {"DischargeVoltage", [](CycleStats const& c) { return c.discharge_voltage; }},
    {"EndCurrent", [](CycleStats const& c) { return c.end_current; }},
    {"EndVoltage", [](CycleStats const& c) { return c.end_voltage; }},
    {"MidVoltage", [](CycleStats const& c) { return c.mid_voltage; }},
    {"Power", [](CycleStats const& c) { return c.power; }},
    {"ResistanceOhms", [](CycleStats const& c) { return c.resistance_ohms; }},
    {"Voltage", [](CycleStats const& c) { return c.voltage; }},
};

constexpr std::string_view kSuffixes[] = {"Average", "First",  "Last",     "Max",
                                          "Min",     "StdDev", "StdError", "Variance"};

struct ColumnPlan {
  std::string_view name;
  std::size_t quantity;
  std::string_view suffix;
};

std::vector<ColumnPlan> const& Plan() {
  static std::vector<ColumnPlan> const plan = [] {
    std::vector<ColumnPlan> out;
    for (auto col : columns::kRollupColumns) {
      bool found = false;
      for (auto suffix : kSuffixes) {
        if (col.size() <= suffix.size() || !col.ends_with(suffix)) continue;
        auto base = col.substr(0, col.size() - suffix.size());
        for (std::size_t q = 0; q < std::size(kQuantities); ++q) {
          if (kQuantities[q].base == base) {
            out.push_back({col, q, suffix});
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (!found) throw std::logic_error("unmapped rollup column");
    }
    return out;
  }();
  return plan;
}

class RunningRollup {
 public:
  RunningRollup() : accs_(std::size(kQuantities)) {}

  void Add(CycleStats const& c) {
    ++cycles_;
    for (std::size_t q = 0; q < std::size(kQuantities); ++q) {
      if (auto v = kQuantities[q].get(c)) accs_[q].Add(*v);
    }
  }

  StatisticRollup Snapshot() const {
    StatisticRollup r;
    r.cycle_count = cycles_;
    for (auto const& col : Plan()) {
      r.entries.push_back({std::string(col.name), accs_[col.quantity].Stat(col.suffix)});
    }
    for (std::size_t q = 0; q < std::size(kQuantities); ++q) {
      if (accs_[q].n == 1) r.single_sample.emplace_back(kQuantities[q].base);
    }
    return r;
  }

 private:
  std::size_t cycles_ = 0;
  std::vector<RollupAcc> accs_;
};

}  // namespace

CycleStats ComputeCycleStats(CanonicalDataset const& d, CycleBoundary const& b,
                             ReferenceCapacity const& ref, StatsOptions const& opts) {
  auto const& pts = d.points;
  if (b.last_point >= pts.size() || b.first_point > b.last_point) {
    throw Error(ErrorCode::kInvalidArgument, "cycle boundary outside dataset");
  }
  double const eps = opts.rest_threshold.value_or(RestThreshold(d));
  CheckSpan(b.charge_span, b.cycle_index, "charge");
  CheckSpan(b.discharge_span, b.cycle_index, "discharge");

  CycleStats c;
  c.cycle_index = b.cycle_index;
  c.first_point_index = pts[b.first_point].index;
  c.point_count = static_cast<std::int64_t>(b.last_point - b.first_point + 1);

  Mean power_all, power_active, voltage_all, temperature;
  Extremes power_range;
  for (std::size_t k = b.first_point; k <= b.last_point; ++k) {
    auto const& p = pts[k];
    double w = Required(p.power, "power");
    power_all.Add(w);
    power_range.Add(w);
    if (ActiveSign(p.current, eps) != 0) power_active.Add(w);
    voltage_all.Add(p.voltage);
    if (p.temperature) temperature.Add(*p.temperature);
  }
  c.power = power_all.Get();
  c.average_power = power_active.Get();
  c.minimum_power = power_range.lo;
  c.maximum_power = power_range.hi;
  c.voltage = voltage_all.Get();
  c.temperature = temperature.Get();
  if (ActiveSign(pts[b.last_point].current, eps) == 0) {
    c.end_rest_voltage = pts[b.last_point].voltage;
  }

  if (b.charge_span) {
    auto const span = *b.charge_span;
    double cap = 0.0, energy = 0.0;
    Mean volts;
    std::optional<std::size_t> last_active;
    for (std::size_t k = span.first; k <= span.last; ++k) {
      auto const& p = pts[k];
      cap = std::max(cap, Required(p.capacity, "capacity"));
      energy = std::max(energy, Required(p.energy, "energy"));
      if (ActiveSign(p.current, eps) > 0) {
        volts.Add(p.voltage);
        last_active = k;
      }
    }
    c.charge_capacity = cap;
    c.charge_energy = energy;
    c.charge_voltage = volts.Get();
    c.start_charge_voltage = pts[span.first].voltage;
    c.start_current = pts[span.first].current;
    if (last_active) {
      c.end_voltage = pts[*last_active].voltage;
      c.end_current = pts[*last_active].current;
    }
    c.resistance_ohms = StepResistance(pts, span, +1, eps);
  }

  if (b.discharge_span) {
    auto const span = *b.discharge_span;
    double cap = 0.0, energy = 0.0;
    Mean volts, power_span, power_active_d;
    Extremes power_d;
    std::optional<std::size_t> last_active;
    for (std::size_t k = span.first; k <= span.last; ++k) {
      auto const& p = pts[k];
      cap = std::max(cap, Required(p.capacity, "capacity"));
      energy = std::max(energy, Required(p.energy, "energy"));
      double w = *p.power;
      power_span.Add(w);
      if (ActiveSign(p.current, eps) < 0) {
        volts.Add(p.voltage);
        power_active_d.Add(w);
        power_d.Add(w);
        last_active = k;
      }
    }
    c.discharge_capacity = cap;
    c.discharge_energy = energy;
    c.discharge_voltage = volts.Get();
    c.discharge_power = power_span.Get();
    c.average_discharge_power = power_active_d.Get();
    c.minimum_discharge_power = power_d.lo;
    c.maximum_discharge_power = power_d.hi;
    c.start_discharge_voltage = pts[span.first].voltage;
    c.start_discharge_current = pts[span.first].current;
    if (last_active) {
      c.discharge_end_voltage = pts[*last_active].voltage;
      c.discharge_end_current = pts[*last_active].current;
    }
    c.discharge_resistance = StepResistance(pts, span, -1, eps);

    // Voltage where the discharged capacity first reaches half the total.
    if (cap > 0.0) {
      double const target = 0.5 * cap;
      for (std::size_t k = span.first; k <= span.last; ++k) {
        double qk = *pts[k].capacity;
        if (qk < target) continue;
        if (k == span.first) {
          c.mid_voltage = pts[k].voltage;
        } else {
          double qa = *pts[k - 1].capacity;
          double va = pts[k - 1].voltage;
          double frac = qk > qa ? (target - qa) / (qk - qa) : 1.0;
          c.mid_voltage = va + frac * (pts[k].voltage - va);
        }
        break;
      }
    }
  }

  c.coulombic_efficiency = Ratio(c.discharge_capacity, OptDouble(c.charge_capacity));
  c.charge_capacity_retention = Ratio(c.charge_capacity, ref.charge);
  c.discharge_capacity_retention = Ratio(c.discharge_capacity, ref.discharge);
  return c;
}

ReferenceCapacity SelectReference(std::span<CycleStats const> cycles,
                                  RetentionReference mode) {
  ReferenceCapacity ref;
  if (mode == RetentionReference::kFirstComplete) {
    for (auto const& c : cycles) {
      if (c.charge_capacity > 0.0 && c.discharge_capacity > 0.0) {
        ref.charge = c.charge_capacity;
        ref.discharge = c.discharge_capacity;
        break;
      }
    }
    return ref;
  }
  for (auto const& c : cycles) {
    if (c.charge_capacity > 0.0) {
      ref.charge = std::max(ref.charge.value_or(0.0), c.charge_capacity);
    }
    if (c.discharge_capacity > 0.0) {
      ref.discharge = std::max(ref.discharge.value_or(0.0), c.discharge_capacity);
    }
  }
  return ref;
}

std::vector<CycleStats> ComputeAllCycleStats(CanonicalDataset const& d,
                                             std::vector<CycleBoundary> const& cycles,
                                             StatsOptions const& opts) {
  StatsOptions local = opts;
  if (!local.rest_threshold) local.rest_threshold = RestThreshold(d);
  std::vector<CycleStats> out;
  out.reserve(cycles.size());
  for (auto const& b : cycles) out.push_back(ComputeCycleStats(d, b, {}, local));

  auto ref = SelectReference(out, local.reference);
  RunningRollup running;
  for (auto& c : out) {
    c.charge_capacity_retention = Ratio(c.charge_capacity, ref.charge);
    c.discharge_capacity_retention = Ratio(c.discharge_capacity, ref.discharge);
    running.Add(c);
    c.statistic_metadata = serialize::RollupStatistics(running.Snapshot()).dump();
  }
  return out;
}

StatisticRollup ComputeRollup(std::span<CycleStats const> cycles) {
  if (cycles.empty()) throw Error(ErrorCode::kEmptyInput, "no cycles to roll up");
  RunningRollup running;
  for (auto const& c : cycles) running.Add(c);
  return running.Snapshot();
}

ProcessedDataset ProcessDataset(CanonicalDataset const& d, StatsOptions const& opts) {
  StatsOptions local = opts;
  if (!local.rest_threshold) local.rest_threshold = RestThreshold(d);
  ProcessedDataset out;
  auto [derived, report] = DeriveFields(d, {local.rest_threshold});
  auto seg = SegmentCycles(derived, {local.rest_threshold});
  out.dataset = std::move(seg.dataset);
  out.report = std::move(report);
  if (out.report.fields["cycle_index"] == DerivationFlag::kAbsent) {
    out.report.fields["cycle_index"] = DerivationFlag::kDerived;
  }
  if (out.report.fields["cycle_step"] == DerivationFlag::kAbsent &&
      !out.dataset.points.empty() && out.dataset.points.front().cycle_step) {
    out.report.fields["cycle_step"] = DerivationFlag::kDerived;
  }
  out.cycles = std::move(seg.cycles);
  out.stats = ComputeAllCycleStats(out.dataset, out.cycles, local);
  out.rollup = ComputeRollup(out.stats);
  return out;
}

}  // namespace cyclebench::engine
