#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cyclebench/core/model.hpp"

namespace cyclebench::analysis {

enum class Direction { kCharge, kDischarge };

std::string_view DirectionName(Direction d);
Direction ParseDirection(std::string_view s);

struct ProfilePoint {
  double capacity = 0.0;  // Ah
  double voltage = 0.0;   // V
};

// Voltage against capacity over the active part of one half-cycle, in
// source order. Throws NotFound for a missing cycle and DegenerateCycle when
// the half-cycle has fewer than two samples.
std::vector<ProfilePoint> VoltageProfile(CanonicalDataset const& d, std::int64_t cycle,
                                         Direction dir);

inline constexpr double kDefaultBinWidth = 0.005;

struct DqdvOptions {
  double dv = kDefaultBinWidth;
  int smooth_window = 0;  // bins; <= 1 disables smoothing, must be odd otherwise
};

struct DqdvCurve {
  std::int64_t cycle_index = 1;
  Direction direction = Direction::kCharge;
  double dv = kDefaultBinWidth;
  std::vector<double> voltage_bins;  // bin centers
  std::vector<double> dqdv;          // Ah/V
  std::string smoothing = "none";
  double total_capacity = 0.0;       // capacity change across the half-cycle
};

// Capacity change of each segment is spread across the voltage bins it
// covers, proportionally to overlap. Throws BadBinWidth for dv <= 0 or
// dv > voltage span.
DqdvCurve Dqdv(CanonicalDataset const& d, std::int64_t cycle, Direction dir,
               DqdvOptions const& opts = {});

// Same binning over an explicit (capacity, voltage) series.
DqdvCurve DqdvFromProfile(std::vector<ProfilePoint> const& profile, DqdvOptions const& opts);

// Centered moving average, reflective edges.
std::vector<double> SmoothMovingAverage(std::vector<double> const& values, int window);

struct Peak {
  std::size_t bin = 0;
  double position = 0.0;    // V
  double intensity = 0.0;   // Ah/V
  double prominence = 0.0;  // Ah/V
  double area = 0.0;        // Ah between the neighbouring valleys
};

// Default threshold: 5% of the curve's value range.
double DefaultMinProminence(std::vector<double> const& values);

// Local maxima (plateaus resolve to their middle bin, edges excluded) whose
// topographic prominence is >= min_prominence and > 0, by position.
std::vector<Peak> FindPeaks(DqdvCurve const& c, std::optional<double> min_prominence = {});

}  // namespace cyclebench::analysis
