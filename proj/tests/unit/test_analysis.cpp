#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "synth.hpp"

#include "cyclebench/analysis/dqdv.hpp"
#include "cyclebench/analysis/gitt.hpp"
#include "cyclebench/analysis/plot.hpp"
#include "cyclebench/analysis/selector.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/engine/cycle_stats.hpp"

using namespace cyclebench;
using namespace cyclebench::analysis;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (Error const& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

DqdvCurve CurveOf(std::vector<double> values, double v0 = 3.0, double dv = 0.01) {
  DqdvCurve c;
  c.dv = dv;
  c.dqdv = std::move(values);
  for (std::size_t k = 0; k < c.dqdv.size(); ++k) c.voltage_bins.push_back(v0 + (k + 0.5) * dv);
  return c;
}

}  // namespace

TEST_CASE("selectors resolve to sorted unique cycles") {
  CHECK(ResolveCycles(SelectInterval{6, 52}, 320) == std::vector<std::int64_t>{6, 58, 110, 162, 214, 266, 318});
  CHECK(ResolveCycles(SelectRange{3, 5}, 10) == std::vector<std::int64_t>{3, 4, 5});
  CHECK(ResolveCycles(SelectExplicit{{9, 2, 2}}, 10) == std::vector<std::int64_t>{2, 9});
  CHECK(ResolveCycles(SelectExplicit{{9, 2, 20}}, 10) == std::vector<std::int64_t>{2, 9});
  CHECK(ResolveCycles(SelectAll{}, 3) == std::vector<std::int64_t>{1, 2, 3});
  CHECK(CodeOf([] { ResolveCycles(SelectRange{11, 12}, 10); }) == ErrorCode::kEmptySelection);
  CHECK(CodeOf([] { ValidateSelector(SelectInterval{1, 0}); }) == ErrorCode::kInvalidSelector);
  CHECK(CodeOf([] { ValidateSelector(SelectRange{5, 3}); }) == ErrorCode::kInvalidSelector);
}

TEST_CASE("selector text and json forms round-trip") {
  std::vector<CycleSelector> all = {SelectAll{}, SelectInterval{6, 52}, SelectExplicit{{1, 5, 9}},
                                    SelectRange{3, 5}};
  for (auto const& s : all) {
    CHECK(SelectorFromJson(SelectorToJson(s)) == s);
    CHECK(ParseSelector(SelectorToString(s)) == s);
  }
  CHECK(ParseSelector("every:6:52") == CycleSelector{SelectInterval{6, 52}});
  CHECK(ParseSelector("3-5") == CycleSelector{SelectRange{3, 5}});
  CHECK(CodeOf([] { ParseSelector("every:x"); }) == ErrorCode::kInvalidSelector);
}

TEST_CASE("voltage profile of D1") {
  auto d = testing::MakeD1();
  auto dis = VoltageProfile(d, 1, Direction::kDischarge);
  CHECK(dis.front().capacity == 0.0);
  CHECK(dis.front().voltage == 4.0);
  CHECK(dis.back().capacity == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(dis.back().voltage == doctest::Approx(3.0));
  auto ch = VoltageProfile(d, 1, Direction::kCharge);
  CHECK(ch.front().voltage == 3.0);
  CHECK(ch.back().capacity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ch.back().voltage == 4.0);
  for (std::size_t k = 1; k < ch.size(); ++k) CHECK(ch[k].capacity >= ch[k - 1].capacity);
  CHECK(CodeOf([&] { VoltageProfile(d, 99, Direction::kCharge); }) == ErrorCode::kNotFound);
}

TEST_CASE("dqdv of a linear profile is constant") {
  auto c = Dqdv(testing::MakeD1(), 1, Direction::kCharge, {0.01, 0});
  REQUIRE(c.dqdv.size() == 100);
  for (std::size_t k = 1; k + 1 < c.dqdv.size(); ++k) CHECK(c.dqdv[k] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(c.total_capacity == doctest::Approx(1.0));
  CHECK(c.smoothing == "none");
  for (std::size_t k = 1; k < c.voltage_bins.size(); ++k) CHECK(c.voltage_bins[k] > c.voltage_bins[k - 1]);
}

TEST_CASE("dqdv rejects bad bin widths") {
  auto d = testing::MakeD1();
  CHECK(CodeOf([&] { Dqdv(d, 1, Direction::kCharge, {10.0, 0}); }) == ErrorCode::kBadBinWidth);
  CHECK(CodeOf([&] { Dqdv(d, 1, Direction::kCharge, {0.0, 0}); }) == ErrorCode::kBadBinWidth);
  CHECK(CodeOf([&] { Dqdv(d, 1, Direction::kCharge, {-0.01, 0}); }) == ErrorCode::kBadBinWidth);
}

TEST_CASE("dqdv conserves capacity on random profiles") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ProfilePoint> prof;
    double q = 0.0, v = 3.0 + u(rng);
    int n = 5 + static_cast<int>(rng() % 300);
    for (int k = 0; k < n; ++k) {
      prof.push_back({q, v});
      q += u(rng) * 1e-2;
      v += (u(rng) - 0.2) * 5e-3;  // mostly rising, sometimes not
    }
    double span = 0.0;
    for (auto const& p : prof) span = std::max(span, std::fabs(p.voltage - prof.front().voltage));
    double lo = prof.front().voltage, hi = lo;
    for (auto const& p : prof) lo = std::min(lo, p.voltage), hi = std::max(hi, p.voltage);
    if (hi - lo < 0.01) continue;
    auto c = DqdvFromProfile(prof, {std::min(0.005, (hi - lo) / 2), 0});
    double sum = 0.0;
    for (double x : c.dqdv) sum += std::fabs(x) * c.dv;
    double total = prof.back().capacity - prof.front().capacity;
    CHECK(std::fabs(sum - total) <= 0.01 * total);
  }
}

TEST_CASE("two-plateau dqdv recovers both peaks and their areas") {
  auto d = testing::TwoPlateauCharge(1.0, 0.6, 3.4, 0.02, 0.4, 3.9, 0.02, 3.0, 4.2, 4001);
  auto c = Dqdv(d, 1, Direction::kCharge, {0.005, 0});
  auto peaks = FindPeaks(c);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].position == doctest::Approx(3.4).epsilon(0.005 / 3.4));
  CHECK(peaks[1].position == doctest::Approx(3.9).epsilon(0.005 / 3.9));
  CHECK(peaks[0].area / peaks[1].area == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("smoothing preserves a constant and needs an odd window") {
  std::vector<double> flat(20, 2.0);
  CHECK(SmoothMovingAverage(flat, 5) == flat);
  CHECK(SmoothMovingAverage({1, 2, 3}, 1) == std::vector<double>{1, 2, 3});
  CHECK(CodeOf([] { SmoothMovingAverage({1, 2, 3}, 4); }) == ErrorCode::kInvalidArgument);
  auto c = Dqdv(testing::MakeD1(), 1, Direction::kCharge, {0.01, 3});
  CHECK(c.smoothing != "none");
}

TEST_CASE("peaks on two gaussians") {
  // Bin centers fall on 3.5 and 3.9 exactly.
  double const v0 = 3.0025;
  std::vector<double> y;
  for (int k = 0; k < 240; ++k) {
    double v = v0 + (k + 0.5) * 0.005;
    y.push_back(2.0 * std::exp(-std::pow((v - 3.5) / 0.03, 2)) + 1.2 * std::exp(-std::pow((v - 3.9) / 0.04, 2)));
  }
  auto c = CurveOf(y, v0, 0.005);
  // Exhaustive scan for strict local maxima.
  std::vector<std::size_t> maxima;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (y[k] > y[k - 1] && y[k] > y[k + 1]) maxima.push_back(k);
  }
  REQUIRE(maxima.size() == 2);
  auto peaks = FindPeaks(c);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].bin == maxima[0]);
  CHECK(peaks[1].bin == maxima[1]);
  CHECK(peaks[0].position == doctest::Approx(3.5));
  CHECK(peaks[1].position == doctest::Approx(3.9));
  CHECK(peaks[0].prominence == doctest::Approx(peaks[0].intensity - y.back()).epsilon(0.05));

  auto shifted = y;
  for (auto& v : shifted) v += 10.0;
  auto again = FindPeaks(CurveOf(shifted, v0, 0.005));
  REQUIRE(again.size() == 2);
  CHECK(again[0].bin == peaks[0].bin);
  CHECK(again[0].prominence == doctest::Approx(peaks[0].prominence));
}

TEST_CASE("no peaks on monotone or flat curves") {
  std::vector<double> up(50);
  for (int k = 0; k < 50; ++k) up[k] = k;
  CHECK(FindPeaks(CurveOf(up)).empty());
  CHECK(FindPeaks(CurveOf(std::vector<double>(50, 1.0))).empty());
  CHECK(DefaultMinProminence(up) == doctest::Approx(0.05 * 49));
}

TEST_CASE("gitt diffusivity closed form") {
  CHECK(GittDiffusivity(3600, 0.010, 0.040, 1.0) ==
        doctest::Approx(4.0 / (std::numbers::pi * 3600.0) * 0.0625).epsilon(1e-12));
  CHECK(GittDiffusivity(3600, 0.010, 0.040, 1.0) == doctest::Approx(2.2105e-5).epsilon(1e-4));
  CHECK(GittDiffusivity(16.0 / std::numbers::pi, 0.02, 0.02, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(CodeOf([] { GittDiffusivity(10, 0.01, 0.0, 1.0); }) == ErrorCode::kNonPositiveDeltaEt);
  CHECK(CodeOf([] { GittDiffusivity(10, 0.01, -1.0, 1.0); }) == ErrorCode::kNonPositiveDeltaEt);
}

TEST_CASE("gitt recovers the constructed pulses") {
  auto d = testing::GittSeries(4, -1e-3, 600.0, 0.01, 0.04, 0.005, 1200.0, 10.0);
  auto steps = Gitt(d);
  REQUIRE(steps.size() == 4);
  for (auto const& s : steps) {
    CHECK(s.pulse_duration == doctest::Approx(600.0));
    CHECK(s.delta_es == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(s.delta_et == doctest::Approx(0.04).epsilon(1e-9));
    CHECK(s.current == doctest::Approx(-1e-3));
    CHECK(s.diffusivity == doctest::Approx(GittDiffusivity(600.0, 0.01, 0.04, 1.0)).epsilon(1e-9));
  }
  GittConfig geo;
  geo.molar_volume_term = 2.0;
  geo.contact_area = 4.0;
  auto scaled = Gitt(d, geo);
  CHECK(scaled[0].diffusivity == doctest::Approx(0.25 * steps[0].diffusivity));
}

TEST_CASE("gitt with no pulses") {
  auto d = testing::FromSegments({{0.0, 100, 3.7, 3.7}}, 10);
  CHECK(CodeOf([&] { Gitt(d); }) == ErrorCode::kNoPulsesFound);
  // A single pulse without a rest after it is not a titration step.
  auto e = testing::FromSegments({{0.0, 100, 3.7, 3.7}, {-1.0, 100, 3.6, 3.5}}, 10);
  CHECK(CodeOf([&] { Gitt(e); }) == ErrorCode::kNoPulsesFound);
}

TEST_CASE("plot series for cycle and point domains") {
  auto processed = engine::ProcessDataset(testing::FromSegments(
      {{1.0, 3600, 3.0, 4.0}, {-1.0, 3240, 4.0, 3.0}, {1.0, 3240, 3.0, 4.0}, {-1.0, 2916, 4.0, 3.0}}, 200));
  PlotSource src{7, "cell", &processed.stats, &processed.dataset};
  auto p = BuildPlotSeries({src}, "cycle", "discharge_capacity", "ce");
  REQUIRE(p.series.size() == 2);
  CHECK(p.series[0].x == std::vector<double>{1, 2});
  CHECK(p.series[0].y[1] == doctest::Approx(0.81));
  CHECK(p.series[1].axis == 2);
  CHECK(p.series[1].variable == "coulombic_efficiency");
  CHECK(p.series[1].y[0] == doctest::Approx(0.9));
  CHECK(PlotSeriesFromJson(PlotSeriesToJson(p)).series.size() == 2);
  auto csv = PlotSeriesToCsv(p);
  CHECK(csv.rfind("project_id,label,cycle,discharge_capacity,coulombic_efficiency", 0) == 0);
  CHECK(PlotSeriesToSvg(p).find("<svg") != std::string::npos);

  auto raw = BuildPlotSeries({src}, "time", "voltage", std::nullopt);
  REQUIRE(raw.series.size() == 1);
  CHECK(raw.series[0].x.size() == processed.dataset.points.size());

  CHECK(CodeOf([&] { BuildPlotSeries({src}, "cycle", "voltage", std::nullopt); }) == ErrorCode::kMixedDomain);
  CHECK(CodeOf([&] { BuildPlotSeries({src}, "cycle", "flux", std::nullopt); }) == ErrorCode::kUnknownVariable);
  CHECK(LookupVariable("retention").id == "discharge_capacity_retention");
}

TEST_CASE("decimation keeps extremes and endpoints") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> y(100000);
  for (auto& v : y) v = n(rng);
  y[54321] = 100.0;
  y[777] = -100.0;
  auto idx = DecimationIndices(y, 1000);
  CHECK(idx.size() <= 1000);
  CHECK(idx.front() == 0);
  CHECK(idx.back() == y.size() - 1);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  CHECK(std::find(idx.begin(), idx.end(), 54321u) != idx.end());
  CHECK(std::find(idx.begin(), idx.end(), 777u) != idx.end());
  auto small = DecimationIndices({1, 2, 3}, 10);
  CHECK(small.size() == 3);
}
