#include "cyclebench/analysis/dqdv.hpp"

#include <algorithm>
#include <cmath>

#include "cyclebench/core/error.hpp"
#include "cyclebench/engine/derive.hpp"
#include "cyclebench/engine/segment.hpp"

namespace cyclebench::analysis {

std::string_view DirectionName(Direction d) {
  return d == Direction::kCharge ? "charge" : "discharge";
}

Direction ParseDirection(std::string_view s) {
  if (s == "charge" || s == "Charge") return Direction::kCharge;
  if (s == "discharge" || s == "Discharge") return Direction::kDischarge;
  throw Error(ErrorCode::kInvalidArgument, "direction must be charge or discharge");
}

std::vector<ProfilePoint> VoltageProfile(CanonicalDataset const& d, std::int64_t cycle,
                                         Direction dir) {
  double const eps = engine::RestThreshold(d);
  auto derived = engine::DeriveFields(d, {eps}).first;
  auto seg = engine::SegmentCycles(derived, {eps});
  auto it = std::find_if(seg.cycles.begin(), seg.cycles.end(),
                         [&](engine::CycleBoundary const& b) { return b.cycle_index == cycle; });
  if (it == seg.cycles.end()) {
    throw Error(ErrorCode::kNotFound, "cycle " + std::to_string(cycle) + " not in dataset");
  }
  auto const& span = dir == Direction::kCharge ? it->charge_span : it->discharge_span;
  std::string const what = "cycle " + std::to_string(cycle) + " " + std::string(DirectionName(dir));
  if (!span) throw Error(ErrorCode::kDegenerateCycle, what + " half-cycle is empty");

  // Stop at the last same-sign sample before any reversal inside the span.
  int const sign = dir == Direction::kCharge ? 1 : -1;
  auto const& pts = seg.dataset.points;
  std::size_t last = span->first;
  for (std::size_t k = span->first; k <= span->last; ++k) {
    int s = engine::ActiveSign(pts[k].current, eps);
    if (s == -sign) break;
    if (s == sign) last = k;
  }
  if (last == span->first) {
    throw Error(ErrorCode::kDegenerateCycle, what + " half-cycle has fewer than 2 samples");
  }
  std::vector<ProfilePoint> out;
  out.reserve(last - span->first + 1);
  for (std::size_t k = span->first; k <= last; ++k) {
    out.push_back({*pts[k].capacity, pts[k].voltage});
  }
  return out;
}

std::vector<double> SmoothMovingAverage(std::vector<double> const& values, int window) {
  if (window <= 1 || values.empty()) return values;
  if (window % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing window must be odd");
  }
  auto const n = static_cast<std::ptrdiff_t>(values.size());
  auto const half = static_cast<std::ptrdiff_t>(window / 2);
  auto reflect = [n](std::ptrdiff_t j) {
    // d c b a | a b c d | d c b a
    while (j < 0 || j >= n) {
      if (j < 0) j = -j - 1;
      if (j >= n) j = 2 * n - j - 1;
    }
    return j;
  };
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::ptrdiff_t j = i - half; j <= i + half; ++j) sum += values[reflect(j)];
    out[i] = sum / static_cast<double>(window);
  }
  return out;
}

DqdvCurve DqdvFromProfile(std::vector<ProfilePoint> const& profile, DqdvOptions const& opts) {
  if (profile.size() < 2) {
    throw Error(ErrorCode::kDegenerateCycle, "half-cycle has fewer than 2 samples");
  }
  auto [lo_it, hi_it] = std::minmax_element(
      profile.begin(), profile.end(),
      [](ProfilePoint const& a, ProfilePoint const& b) { return a.voltage < b.voltage; });
  double const vmin = lo_it->voltage;
  double const span = hi_it->voltage - vmin;
  double const dv = opts.dv;
  if (!(dv > 0.0) || !std::isfinite(dv) || dv > span) {
    throw Error(ErrorCode::kBadBinWidth,
                "bin width " + std::to_string(dv) + " V for a " + std::to_string(span) +
                    " V half-cycle");
  }
  auto const nbins = static_cast<std::size_t>(std::ceil(span / dv - 1e-9));

  DqdvCurve c;
  c.dv = dv;
  c.voltage_bins.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) {
    c.voltage_bins[i] = vmin + (static_cast<double>(i) + 0.5) * dv;
  }
  std::vector<double> dq(nbins, 0.0);
  auto bin_of = [&](double v) {
    auto i = static_cast<std::ptrdiff_t>(std::floor((v - vmin) / dv));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, nbins - 1));
  };
  for (std::size_t k = 1; k < profile.size(); ++k) {
    double const q = profile[k].capacity - profile[k - 1].capacity;
    double va = profile[k - 1].voltage;
    double vb = profile[k].voltage;
    if (va > vb) std::swap(va, vb);
    std::size_t const ia = bin_of(va);
    std::size_t const ib = bin_of(vb);
    if (ia == ib || vb == va) {
      dq[ia] += q;
      continue;
    }
    double const width = vb - va;
    for (std::size_t i = ia; i <= ib; ++i) {
      double const lo = std::max(va, vmin + static_cast<double>(i) * dv);
      double const hi = i == ib ? vb : std::min(vb, vmin + static_cast<double>(i + 1) * dv);
      if (hi > lo) dq[i] += q * (hi - lo) / width;
    }
  }
  c.total_capacity = profile.back().capacity - profile.front().capacity;
  c.dqdv.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) c.dqdv[i] = dq[i] / dv;
  if (opts.smooth_window > 1) {
    c.dqdv = SmoothMovingAverage(c.dqdv, opts.smooth_window);
    c.smoothing = "moving-average(w=" + std::to_string(opts.smooth_window) + ", reflect)";
  }
  return c;
}

DqdvCurve Dqdv(CanonicalDataset const& d, std::int64_t cycle, Direction dir,
               DqdvOptions const& opts) {
  auto c = DqdvFromProfile(VoltageProfile(d, cycle, dir), opts);
  c.cycle_index = cycle;
  c.direction = dir;
  return c;
}

double DefaultMinProminence(std::vector<double> const& values) {
  if (values.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return 0.05 * (*hi - *lo);
}

std::vector<Peak> FindPeaks(DqdvCurve const& c, std::optional<double> min_prominence) {
  auto const& y = c.dqdv;
  std::size_t const n = y.size();
  double const threshold = min_prominence.value_or(DefaultMinProminence(y));
  std::vector<Peak> peaks;
  if (n < 3) return peaks;

  for (std::size_t i = 1; i + 1 < n;) {
    if (!(y[i] > y[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 < n && y[j + 1] < y[i]) {
      std::size_t const mid = (i + j) / 2;
      // Lowest point on each side before reaching higher ground.
      double left_min = y[i];
      for (std::size_t k = i; k-- > 0;) {
        if (y[k] > y[i]) break;
        left_min = std::min(left_min, y[k]);
      }
      double right_min = y[i];
      for (std::size_t k = j + 1; k < n; ++k) {
        if (y[k] > y[i]) break;
        right_min = std::min(right_min, y[k]);
      }
      double const prominence = y[i] - std::max(left_min, right_min);
      if (prominence > 0.0 && prominence >= threshold) {
        peaks.push_back({mid, c.voltage_bins[mid], y[mid], prominence, 0.0});
      }
    }
    i = j + 1;
  }

  // Area of each peak between the valleys separating it from its neighbours.
  for (std::size_t p = 0; p < peaks.size(); ++p) {
    std::size_t lo = 0;
    std::size_t hi = n - 1;
    if (p > 0) {
      auto b = y.begin() + static_cast<std::ptrdiff_t>(peaks[p - 1].bin);
      auto e = y.begin() + static_cast<std::ptrdiff_t>(peaks[p].bin) + 1;
      lo = static_cast<std::size_t>(std::min_element(b, e) - y.begin());
    }
    if (p + 1 < peaks.size()) {
      auto b = y.begin() + static_cast<std::ptrdiff_t>(peaks[p].bin);
      auto e = y.begin() + static_cast<std::ptrdiff_t>(peaks[p + 1].bin) + 1;
      hi = static_cast<std::size_t>(std::min_element(b, e) - y.begin());
      if (hi > 0) --hi;  // the valley bin belongs to the right-hand peak
    }
    double area = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) area += y[k] * c.dv;
    peaks[p].area = area;
  }
  return peaks;
}

}  // namespace cyclebench::analysis
