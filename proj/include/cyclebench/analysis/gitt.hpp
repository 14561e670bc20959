#pragma once

#include <optional>
#include <vector>

#include "cyclebench/core/model.hpp"

namespace cyclebench::analysis {

struct GittConfig {
  double molar_volume_term = 1.0;  // n_m * V_m, cm^3
  double contact_area = 1.0;       // S, cm^2
  std::optional<double> rest_threshold;
  int ir_skip_samples = 1;         // samples after the current step left out of dEt
};

struct GittStep {
  std::size_t step = 0;       // 0-based pulse ordinal
  double step_start_time = 0.0;
  double pulse_duration = 0.0;  // s
  double current = 0.0;         // mean pulse current, A
  double delta_es = 0.0;        // V
  double delta_et = 0.0;        // V
  double diffusivity = 0.0;     // cm^2/s
};

// D = 4 / (pi tau) * g^2 * (dEs / dEt)^2. Throws NonPositiveDeltaEt.
double GittDiffusivity(double tau, double delta_es, double delta_et, double geometry);

// Pulses need a rest on both sides; others are skipped. Throws NoPulsesFound.
std::vector<GittStep> Gitt(CanonicalDataset const& d, GittConfig const& cfg = {});

}  // namespace cyclebench::analysis
