#pragma once

#include <span>
#include <vector>

#include "cyclebench/core/model.hpp"
#include "cyclebench/engine/derive.hpp"
#include "cyclebench/engine/segment.hpp"

namespace cyclebench::engine {

enum class RetentionReference {
  kFirstComplete,  // first cycle with nonzero charge and discharge capacity
  kMaxCapacity,    // largest capacity of each direction
};

struct ReferenceCapacity {
  OptDouble charge;
  OptDouble discharge;
};

struct StatsOptions {
  std::optional<double> rest_threshold;
  RetentionReference reference = RetentionReference::kFirstComplete;
};

// Statistics of one cycle. Capacity, energy and power must already be
// present on the points (see DeriveFields). Retention is left null when the
// matching reference capacity is missing or zero. StatisticMetaData is not
// filled here. Throws DegenerateCycle when a half-cycle span has < 2 points.
CycleStats ComputeCycleStats(CanonicalDataset const& d, CycleBoundary const& b,
                             ReferenceCapacity const& ref, StatsOptions const& opts = {});

ReferenceCapacity SelectReference(std::span<CycleStats const> cycles,
                                  RetentionReference mode);

// Every cycle with retention against the selected reference and
// StatisticMetaData holding the rollup of cycles 1..k.
std::vector<CycleStats> ComputeAllCycleStats(CanonicalDataset const& d,
                                             std::vector<CycleBoundary> const& cycles,
                                             StatsOptions const& opts = {});

// Cross-cycle statistics keyed by the StatisticMetaData names. Sample (n-1)
// spread; a quantity with a single sample gets spread 0 and is listed in
// single_sample. Throws EmptyInput.
StatisticRollup ComputeRollup(std::span<CycleStats const> cycles);

// Full engine pass over a normalized dataset.
struct ProcessedDataset {
  CanonicalDataset dataset;
  DerivationReport report;
  std::vector<CycleBoundary> cycles;
  std::vector<CycleStats> stats;
  StatisticRollup rollup;
};
ProcessedDataset ProcessDataset(CanonicalDataset const& d, StatsOptions const& opts = {});

}  // namespace cyclebench::engine
