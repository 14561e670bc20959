#include "synth.hpp"

#include <cmath>

namespace cyclebench::testing {

namespace {

void Push(CanonicalDataset& d, double t, double v, double i) {
  DataPoint p;
  p.index = static_cast<std::int64_t>(d.points.size());
  p.time = t;
  p.voltage = v;
  p.current = i;
  d.points.push_back(p);
}

double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

CanonicalDataset MakeD1() {
  CanonicalDataset d;
  d.source_format = "synthetic";
  for (int k = 0; k <= 3600; ++k) Push(d, k, 3.0 + k / 3600.0, 1.0);
  double const t0 = 3601.0;
  for (int k = 0; k <= 3240; ++k) Push(d, t0 + k, 4.0 - k / 3240.0, -1.0);
  return d;
}

CanonicalDataset FromSegments(std::vector<Segment> const& segs, int samples, double gap) {
  CanonicalDataset d;
  d.source_format = "synthetic";
  double t = 0.0;
  for (auto const& s : segs) {
    for (int k = 0; k < samples; ++k) {
      double f = samples > 1 ? static_cast<double>(k) / (samples - 1) : 0.0;
      Push(d, t + f * s.duration, s.v0 + f * (s.v1 - s.v0), s.current);
    }
    t += s.duration + gap;
  }
  return d;
}

CanonicalDataset RandomCycling(std::mt19937_64& rng, RandomCyclingOptions const& opts) {
  std::uniform_int_distribution<int> n_cycles(1, opts.max_cycles);
  std::uniform_int_distribution<int> n_pts(2, opts.max_points_per_segment);
  std::uniform_int_distribution<int> n_rest(0, 4);
  std::uniform_real_distribution<double> amps(0.05, 3.0);
  std::uniform_real_distribution<double> dt(0.5, 40.0);
  std::uniform_real_distribution<double> noise(-2e-3, 2e-3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CanonicalDataset d;
  d.source_format = "synthetic";
  double t = 0.0;
  double v = 3.0 + unit(rng) * 0.5;
  int const cycles = n_cycles(rng);
  auto emit = [&](double current, std::int64_t cycle, std::int64_t step) {
    DataPoint p;
    p.index = static_cast<std::int64_t>(d.points.size());
    p.time = t;
    p.voltage = v + noise(rng);
    p.current = current;
    if (opts.source_cycle_index) p.cycle_index = cycle;
    p.step_index = step;
    if (opts.temperature) p.temperature = 25.0 + 5.0 * unit(rng);
    d.points.push_back(p);
    t += dt(rng);
  };
  for (int c = 1; c <= cycles; ++c) {
    // Derived segmentation attaches rests to the preceding half-cycle, so a
    // leading rest only makes sense on the very first cycle.
    int lead = (c == 1 || opts.source_cycle_index) ? n_rest(rng) : 0;
    for (int k = 0; k < lead; ++k) emit(0.0, c, 1);
    double ic = amps(rng);
    int n = n_pts(rng);
    for (int k = 0; k < n; ++k) {
      v += 0.01 + 0.02 * unit(rng);
      emit(ic, c, 2);
    }
    int mid = n_rest(rng);
    for (int k = 0; k < mid; ++k) {
      v -= 0.002;
      emit(0.0, c, 3);
    }
    double id = -amps(rng);
    n = n_pts(rng);
    for (int k = 0; k < n; ++k) {
      v -= 0.01 + 0.02 * unit(rng);
      emit(id, c, 4);
    }
    int tail = n_rest(rng);
    for (int k = 0; k < tail; ++k) {
      v += 0.002;
      emit(0.0, c, 5);
    }
  }
  return d;
}

double TwoPlateauQ(double v, double total, double w1, double c1, double s1, double w2, double c2,
                   double s2) {
  return total * (w1 * Logistic((v - c1) / s1) + w2 * Logistic((v - c2) / s2));
}

CanonicalDataset TwoPlateauCharge(double total, double w1, double c1, double s1, double w2,
                                  double c2, double s2, double v_lo, double v_hi, int samples) {
  // Sample on a fine voltage grid, then place samples in time so the
  // capacity integral of a 1 A current reproduces Q(V).
  CanonicalDataset d;
  d.source_format = "synthetic";
  double const q0 = TwoPlateauQ(v_lo, total, w1, c1, s1, w2, c2, s2);
  for (int k = 0; k < samples; ++k) {
    double v = v_lo + (v_hi - v_lo) * k / (samples - 1);
    double q = TwoPlateauQ(v, total, w1, c1, s1, w2, c2, s2) - q0;
    Push(d, q * 3600.0, v, 1.0);
  }
  return d;
}

CanonicalDataset GittSeries(int pulses, double current, double tau, double de_s, double de_t,
                            double ir, double rest, double dt) {
  CanonicalDataset d;
  d.source_format = "synthetic";
  double t = 0.0;
  double v_rest = 3.9;
  int const n_rest = static_cast<int>(std::lround(rest / dt)) + 1;
  int const n_pulse = static_cast<int>(std::lround(tau / dt)) + 1;
  for (int k = 0; k < n_rest; ++k, t += dt) Push(d, t, v_rest, 0.0);
  for (int p = 0; p < pulses; ++p) {
    double const sign = current < 0 ? -1.0 : 1.0;
    for (int k = 0; k < n_pulse; ++k, t += dt) {
      double v;
      if (k == 0) {
        v = v_rest + sign * ir * 0.5;
      } else {
        double f = static_cast<double>(k - 1) / (n_pulse - 2);
        v = v_rest + sign * (ir + de_t * f);
      }
      Push(d, t, v, current);
    }
    double const next = v_rest + sign * de_s;
    for (int k = 0; k < n_rest; ++k, t += dt) {
      double f = static_cast<double>(k + 1) / n_rest;
      Push(d, t, next + sign * ir * (1.0 - f), 0.0);
    }
    v_rest = next;
  }
  return d;
}

}  // namespace cyclebench::testing
