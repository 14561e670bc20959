#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cyclebench/core/model.hpp"

namespace cyclebench::engine {

// Inclusive range of positions in CanonicalDataset::points.
struct IndexSpan {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  friend bool operator==(IndexSpan const&, IndexSpan const&) = default;
};

struct CycleBoundary {
  std::int64_t cycle_index = 1;
  std::size_t first_point = 0;  // position, inclusive
  std::size_t last_point = 0;   // position, inclusive
  std::optional<IndexSpan> charge_span;
  std::optional<IndexSpan> discharge_span;

  friend bool operator==(CycleBoundary const&, CycleBoundary const&) = default;
};

struct SegmentOptions {
  std::optional<double> rest_threshold;
};

struct Segmentation {
  std::vector<CycleBoundary> cycles;
  CanonicalDataset dataset;  // input with cycle_index (and cycle_step) filled
};

// Source cycle indices are followed verbatim when every point has one.
// Otherwise a cycle is a charge half-cycle followed by the next discharge
// half-cycle; rests stay with the preceding half-cycle. Throws NoCycles when
// the current never leaves rest.
Segmentation SegmentCycles(CanonicalDataset const& d, SegmentOptions const& opts = {});

// Charge/discharge spans inside [first, last] from the current signs.
void AssignHalfCycleSpans(CanonicalDataset const& d, double eps, CycleBoundary& b);

}  // namespace cyclebench::engine
