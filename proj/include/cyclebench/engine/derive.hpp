#pragma once

#include <map>
#include <string>
#include <utility>

#include "cyclebench/core/model.hpp"

namespace cyclebench::engine {

// Default rest-current threshold: max(1e-6 A, 1e-4 * max|I|).
double RestThreshold(CanonicalDataset const& d);

// +1 charge, -1 discharge, 0 rest.
inline int ActiveSign(double current, double eps) {
  if (current > eps) return 1;
  if (current < -eps) return -1;
  return 0;
}

enum class DerivationFlag { kFromSource, kDerived, kAbsent };

std::string_view DerivationFlagName(DerivationFlag f);

struct DerivationReport {
  // Keyed by DataPoint field name; covers every numeric field.
  std::map<std::string, DerivationFlag> fields;

  DerivationFlag at(std::string const& field) const { return fields.at(field); }
};

struct DeriveOptions {
  std::optional<double> rest_threshold;
};

// Fills capacity = integral |I| dt and energy = integral |I V| dt
// (trapezoidal, reset at every half-cycle boundary) and power = V I. A field
// with any value from the source is left untouched.
std::pair<CanonicalDataset, DerivationReport> DeriveFields(
    CanonicalDataset const& d, DeriveOptions const& opts = {});

}  // namespace cyclebench::engine
