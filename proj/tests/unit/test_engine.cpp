#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"

#include "brute_stats.hpp"
#include "synth.hpp"

#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/engine/cycle_stats.hpp"

using namespace cyclebench;
using namespace cyclebench::engine;
using cyclebench::testing::Segment;

namespace {

CanonicalDataset Signs(std::vector<double> currents) {
  CanonicalDataset d;
  for (std::size_t k = 0; k < currents.size(); ++k) {
    DataPoint p;
    p.index = static_cast<std::int64_t>(k);
    p.time = static_cast<double>(k);
    p.voltage = 3.5;
    p.current = currents[k];
    d.points.push_back(p);
  }
  return d;
}

void CheckClose(OptDouble got, std::optional<double> want, char const* what, double rel = 1e-9) {
  CAPTURE(what);
  REQUIRE(got.has_value() == want.has_value());
  if (!got) return;
  double tol = std::max(1e-12, rel * std::max(std::fabs(*got), std::fabs(*want)));
  CHECK(std::fabs(*got - *want) <= tol);
}

}  // namespace

TEST_CASE("derive: constant current integrates to 1 Ah and 3.5 Wh") {
  auto d = testing::FromSegments({{1.0, 3600.0, 3.0, 4.0}}, 3601, 0.0);
  auto [out, report] = DeriveFields(d);
  CHECK(*out.points.back().capacity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*out.points.back().energy == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(*out.points.back().power == doctest::Approx(4.0));
  CHECK(report.at("capacity") == DerivationFlag::kDerived);
  CHECK(report.at("temperature") == DerivationFlag::kAbsent);
}

TEST_CASE("derive: source values are never overwritten") {
  auto d = testing::MakeD1();
  for (auto& p : d.points) p.capacity = 42.0;
  auto [out, report] = DeriveFields(d);
  CHECK(report.at("capacity") == DerivationFlag::kFromSource);
  CHECK(report.at("energy") == DerivationFlag::kDerived);
  for (auto const& p : out.points) CHECK(*p.capacity == 42.0);
}

TEST_CASE("derive: integrals reset at the half-cycle boundary") {
  auto [out, report] = DeriveFields(testing::MakeD1());
  CHECK(*out.points[3600].capacity == doctest::Approx(1.0));
  CHECK(*out.points[3601].capacity == 0.0);
  CHECK(*out.points.back().capacity == doctest::Approx(0.9));
  CHECK(RestThreshold(out) == doctest::Approx(1e-4));
}

TEST_CASE("segment: derived cycles from current signs") {
  auto seg = SegmentCycles(Signs({1, 1, -1, -1, 1, 1, -1, -1}));
  REQUIRE(seg.cycles.size() == 2);
  CHECK(seg.cycles[0].first_point == 0);
  CHECK(seg.cycles[0].last_point == 3);
  CHECK(seg.cycles[1].first_point == 4);
  CHECK(seg.cycles[1].cycle_index == 2);
  CHECK(*seg.dataset.points[5].cycle_index == 2);
  CHECK(seg.cycles[0].charge_span == IndexSpan{0, 1});
  CHECK(seg.cycles[0].discharge_span == IndexSpan{2, 3});
}

TEST_CASE("segment: rests stay with the preceding half-cycle") {
  auto seg = SegmentCycles(Signs({0, 1, 1, 0, -1, -1, 0, 0, 1, 1, -1, -1}));
  REQUIRE(seg.cycles.size() == 2);
  CHECK(seg.cycles[0].last_point == 7);
  CHECK(seg.cycles[1].first_point == 8);
}

TEST_CASE("segment: source labels are followed verbatim") {
  auto d = Signs({1, -1, 1, -1});
  std::int64_t labels[] = {1, 1, 2, 2};
  for (int k = 0; k < 4; ++k) d.points[k].cycle_index = labels[k];
  auto seg = SegmentCycles(d);
  REQUIRE(seg.cycles.size() == 2);
  CHECK(seg.cycles[0].first_point == 0);
  CHECK(seg.cycles[0].last_point == 1);
  CHECK(seg.cycles[1].first_point == 2);
  CHECK(seg.cycles[1].last_point == 3);
}

TEST_CASE("segment: all rest throws NoCycles") {
  try {
    SegmentCycles(Signs({0, 0, 0}));
    FAIL("expected NoCycles");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kNoCycles);
  }
}

TEST_CASE("segment is idempotent") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 30; ++k) {
    auto d = testing::RandomCycling(rng, {});
    auto once = SegmentCycles(d);
    auto twice = SegmentCycles(once.dataset);
    CHECK(once.cycles == twice.cycles);
  }
}

TEST_CASE("D1 closed form") {
  auto p = ProcessDataset(testing::MakeD1());
  REQUIRE(p.stats.size() == 1);
  auto const& c = p.stats[0];
  CHECK(c.charge_capacity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.discharge_capacity == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(*c.coulombic_efficiency == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(c.charge_energy == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(*c.mid_voltage == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(*c.maximum_power == doctest::Approx(4.0));
  CHECK(*c.charge_capacity_retention == 1.0);
  CHECK(*c.discharge_capacity_retention == 1.0);
  CHECK(*c.start_charge_voltage == 3.0);
  CHECK(*c.end_voltage == 4.0);
  CHECK(*c.start_discharge_voltage == 4.0);
  CHECK(*c.discharge_end_voltage == 3.0);
  CHECK_FALSE(c.end_rest_voltage);
  CHECK_FALSE(c.resistance_ohms);
  CHECK(c.point_count == 3601 + 3241);
}

TEST_CASE("retention against the reference cycle") {
  auto d = testing::FromSegments({{1.0, 3600, 3.0, 4.0},
                                  {-1.0, 3240, 4.0, 3.0},
                                  {1.0, 3240, 3.0, 4.0},
                                  {-1.0, 2916, 4.0, 3.0}},
                                 2001, 1.0);
  auto p = ProcessDataset(d);
  REQUIRE(p.stats.size() == 2);
  CHECK(p.stats[1].discharge_capacity == doctest::Approx(0.81).epsilon(1e-9));
  CHECK(*p.stats[1].discharge_capacity_retention == doctest::Approx(0.9).epsilon(1e-9));

  StatsOptions max_ref;
  max_ref.reference = RetentionReference::kMaxCapacity;
  auto q = ProcessDataset(d, max_ref);
  CHECK(*q.stats[0].charge_capacity_retention == 1.0);
}

TEST_CASE("rollup sample statistics") {
  std::vector<CycleStats> cs(2);
  cs[0].charge_capacity = 1.0;
  cs[0].discharge_capacity = 1.0;
  cs[0].coulombic_efficiency = 0.9;
  cs[1].cycle_index = 2;
  cs[1].charge_capacity = 1.0;
  cs[1].discharge_capacity = 0.9;
  cs[1].coulombic_efficiency = 1.0;
  auto r = ComputeRollup(cs);
  CHECK(r.cycle_count == 2);
  CHECK(*r.get("DischargeCapacityAverage") == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(*r.get("DischargeCapacityStdDev") == doctest::Approx(0.0707106781186548).epsilon(1e-12));
  CHECK(*r.get("DischargeCapacityVariance") == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(*r.get("DischargeCapacityStdError") == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(*r.get("DischargeCapacityFirst") == 1.0);
  CHECK(*r.get("DischargeCapacityLast") == 0.9);
  CHECK(*r.get("CoulombicEfficiencyAverage") == doctest::Approx(0.95));
  CHECK_FALSE(r.get("MidVoltageStdDev"));

  auto stats = serialize::RollupStatistics(r);
  CHECK(stats.size() == 51);
  CHECK(serialize::RollupFromJson(serialize::RollupToJson(r)) == r);
}

TEST_CASE("rollup of a single cycle flags zero spread") {
  std::vector<CycleStats> cs(1);
  cs[0].discharge_capacity = 1.0;
  auto r = ComputeRollup(cs);
  CHECK(*r.get("DischargeCapacityAverage") == 1.0);
  CHECK(*r.get("DischargeCapacityStdDev") == 0.0);
  CHECK(*r.get("DischargeCapacityVariance") == 0.0);
  CHECK(std::find(r.single_sample.begin(), r.single_sample.end(), "DischargeCapacity") !=
        r.single_sample.end());
  try {
    ComputeRollup(std::vector<CycleStats>{});
    FAIL("expected EmptyInput");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kEmptyInput);
  }
}

TEST_CASE("statistic metadata holds the running rollup") {
  std::mt19937_64 rng(5);
  auto p = ProcessDataset(testing::RandomCycling(rng, {6, 20}));
  for (std::size_t k = 0; k < p.stats.size(); ++k) {
    auto meta = nlohmann::ordered_json::parse(p.stats[k].statistic_metadata);
    CHECK(meta.size() == 51);
    CHECK(meta == serialize::RollupStatistics(ComputeRollup(std::span(p.stats).first(k + 1))));
  }
  CHECK(p.rollup == ComputeRollup(p.stats));
}

TEST_CASE("conservation of points") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 40; ++k) {
    auto d = testing::RandomCycling(rng, {});
    auto p = ProcessDataset(d);
    std::int64_t total = 0;
    for (auto const& c : p.stats) total += c.point_count;
    CHECK(total == static_cast<std::int64_t>(d.points.size()));
  }
}

TEST_CASE("scaling currents scales capacity and power only") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = testing::RandomCycling(rng, {});
    double const k = 0.25 + 0.5 * trial;
    auto scaled = d;
    for (auto& p : scaled.points) p.current *= k;
    auto a = ProcessDataset(d);
    auto b = ProcessDataset(scaled);
    REQUIRE(a.stats.size() == b.stats.size());
    for (std::size_t c = 0; c < a.stats.size(); ++c) {
      auto const& x = a.stats[c];
      auto const& y = b.stats[c];
      CHECK(y.charge_capacity == doctest::Approx(k * x.charge_capacity).epsilon(1e-12));
      CHECK(y.discharge_capacity == doctest::Approx(k * x.discharge_capacity).epsilon(1e-12));
      if (x.maximum_power) CHECK(*y.maximum_power == doctest::Approx(k * *x.maximum_power).epsilon(1e-12));
      if (x.power) CHECK(*y.power == doctest::Approx(k * *x.power).epsilon(1e-12));
      CheckClose(y.coulombic_efficiency, x.coulombic_efficiency, "ce", 1e-12);
      CheckClose(y.mid_voltage, x.mid_voltage, "mid", 1e-12);
    }
  }
}

TEST_CASE("half-cycle with a single point is degenerate") {
  auto d = Signs({1, 1, 1, -1});
  try {
    ProcessDataset(d);
    FAIL("expected DegenerateCycle");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::kDegenerateCycle);
  }
}

TEST_CASE("step resistance at a rest to active transition") {
  auto d = testing::FromSegments({{0.0, 10, 3.5, 3.5}, {2.0, 100, 3.6, 3.9}, {-2.0, 100, 3.8, 3.4}}, 11);
  auto p = ProcessDataset(d);
  REQUIRE(p.stats.size() == 1);
  CHECK(*p.stats[0].resistance_ohms == doctest::Approx(0.05));
  CHECK_FALSE(p.stats[0].discharge_resistance);
}

TEST_CASE("engine agrees with the brute-force oracle") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 25; ++trial) {
    testing::RandomCyclingOptions opts;
    opts.source_cycle_index = trial % 3 == 0;
    opts.temperature = trial % 2 == 0;
    auto d = testing::RandomCycling(rng, opts);
    auto got = ProcessDataset(d);
    auto want = testing::BruteForceStats(d);
    REQUIRE(got.stats.size() == want.size());
    for (std::size_t c = 0; c < want.size(); ++c) {
      auto row = serialize::CycleRow(got.stats[c], 0);
      for (auto const& [key, v] : want[c].columns) {
        auto const& cell = row.at(key);
        CheckClose(cell.is_null() ? OptDouble{} : OptDouble{cell.get<double>()}, v, key.c_str());
      }
      auto meta = serialize::RollupStatistics(ComputeRollup(std::span(got.stats).first(c + 1)));
      for (auto const& [key, v] : want[c].rollup) {
        if (!meta.contains(key)) continue;
        auto const& cell = meta.at(key);
        CheckClose(cell.is_null() ? OptDouble{} : OptDouble{cell.get<double>()}, v, key.c_str());
      }
    }
  }
}
