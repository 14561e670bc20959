#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cyclebench/core/model.hpp"

namespace cyclebench::testing {

// Charge +1 A for 3600 s with V 3.0 -> 4.0, then discharge -1 A for 3240 s
// with V 4.0 -> 3.0, sampled every second.
CanonicalDataset MakeD1();

struct Segment {
  double current;   // A, held for the whole segment
  double duration;  // s
  double v0;
  double v1;  // voltage ramps linearly v0 -> v1
};

// Samples each segment at `samples` evenly spaced points (both ends
// included). Times continue across segments with a gap of `gap` seconds.
CanonicalDataset FromSegments(std::vector<Segment> const& segs, int samples, double gap = 1.0);

struct RandomCyclingOptions {
  int max_cycles = 10;
  int max_points_per_segment = 40;
  bool source_cycle_index = false;
  bool temperature = false;
};

// Piecewise-constant current: per cycle an optional leading rest, a charge,
// optional rest, a discharge, optional trailing rest. Irregular time steps,
// noisy voltages.
CanonicalDataset RandomCycling(std::mt19937_64& rng, RandomCyclingOptions const& opts);

// Constant-current half-cycle whose V(Q) is the inverse of
// Q(V) = total * (w1 * S((V-c1)/s1) + w2 * S((V-c2)/s2)) with S the
// logistic, sampled on a fine capacity grid. Charge direction.
CanonicalDataset TwoPlateauCharge(double total, double w1, double c1, double s1, double w2,
                                  double c2, double s2, double v_lo, double v_hi, int samples);
double TwoPlateauQ(double v, double total, double w1, double c1, double s1, double w2, double c2,
                   double s2);

// Rest, then `pulses` x (pulse of `current` for tau seconds, rest). The
// voltage drops by `ir` at pulse start, then by de_t during the pulse, and
// recovers to a level de_s below the previous rest voltage.
CanonicalDataset GittSeries(int pulses, double current, double tau, double de_s, double de_t,
                            double ir, double rest, double dt);

}  // namespace cyclebench::testing
