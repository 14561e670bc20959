#include "cyclebench/analysis/gitt.hpp"

#include <cmath>
#include <numbers>

#include "cyclebench/core/error.hpp"
#include "cyclebench/engine/derive.hpp"

namespace cyclebench::analysis {

double GittDiffusivity(double tau, double delta_es, double delta_et, double geometry) {
  if (!(delta_et > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDeltaEt, "transient voltage change must be > 0");
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "pulse duration must be > 0");
  double const ratio = delta_es / delta_et;
  return 4.0 / (std::numbers::pi * tau) * geometry * geometry * ratio * ratio;
}

namespace {

struct Run {
  std::size_t first;
  std::size_t last;
  int sign;
};

}  // namespace

std::vector<GittStep> Gitt(CanonicalDataset const& d, GittConfig const& cfg) {
  if (!(cfg.contact_area > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "contact area must be > 0");
  }
  if (cfg.ir_skip_samples < 0) {
    throw Error(ErrorCode::kInvalidArgument, "IR skip must be >= 0");
  }
  auto const& pts = d.points;
  double const eps = cfg.rest_threshold.value_or(engine::RestThreshold(d));
  double const geometry = cfg.molar_volume_term / cfg.contact_area;

  std::vector<Run> runs;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    int s = engine::ActiveSign(pts[k].current, eps);
    if (runs.empty() || runs.back().sign != s) {
      runs.push_back({k, k, s});
    } else {
      runs.back().last = k;
    }
  }

  std::vector<GittStep> out;
  std::size_t ordinal = 0;
  bool any_pulse = false;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    auto const& pulse = runs[r];
    if (pulse.sign == 0) continue;
    any_pulse = true;
    std::size_t const this_ordinal = ordinal++;
    if (r == 0 || r + 1 >= runs.size()) continue;
    auto const& before = runs[r - 1];
    auto const& after = runs[r + 1];
    if (before.sign != 0 || after.sign != 0) continue;
    auto const skip = static_cast<std::size_t>(cfg.ir_skip_samples);
    if (pulse.first + skip >= pulse.last) continue;

    GittStep step;
    step.step = this_ordinal;
    step.step_start_time = pts[pulse.first].time;
    step.pulse_duration = pts[pulse.last].time - pts[pulse.first].time;
    double current = 0.0;
    for (std::size_t k = pulse.first; k <= pulse.last; ++k) current += pts[k].current;
    step.current = current / static_cast<double>(pulse.last - pulse.first + 1);
    step.delta_et = std::abs(pts[pulse.last].voltage - pts[pulse.first + skip].voltage);
    step.delta_es = std::abs(pts[after.last].voltage - pts[before.last].voltage);
    step.diffusivity =
        GittDiffusivity(step.pulse_duration, step.delta_es, step.delta_et, geometry);
    out.push_back(step);
  }
  if (!any_pulse || out.empty()) {
    throw Error(ErrorCode::kNoPulsesFound,
                any_pulse ? "no current pulse is bracketed by rests"
                          : "current never leaves the rest band");
  }
  return out;
}

}  // namespace cyclebench::analysis
