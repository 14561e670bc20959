#include "cyclebench/engine/segment.hpp"

#include <algorithm>

#include "cyclebench/core/error.hpp"
#include "cyclebench/engine/derive.hpp"

namespace cyclebench::engine {

void AssignHalfCycleSpans(CanonicalDataset const& d, double eps, CycleBoundary& b) {
  std::optional<std::size_t> first_charge;
  std::optional<std::size_t> first_discharge;
  for (std::size_t k = b.first_point; k <= b.last_point; ++k) {
    int s = ActiveSign(d.points[k].current, eps);
    if (s > 0 && !first_charge) first_charge = k;
    if (s < 0 && !first_discharge) first_discharge = k;
    if (first_charge && first_discharge) break;
  }
  b.charge_span.reset();
  b.discharge_span.reset();
  if (first_charge && first_discharge) {
    if (*first_charge < *first_discharge) {
      b.charge_span = IndexSpan{*first_charge, *first_discharge - 1};
      b.discharge_span = IndexSpan{*first_discharge, b.last_point};
    } else {
      b.discharge_span = IndexSpan{*first_discharge, *first_charge - 1};
      b.charge_span = IndexSpan{*first_charge, b.last_point};
    }
  } else if (first_charge) {
    b.charge_span = IndexSpan{*first_charge, b.last_point};
  } else if (first_discharge) {
    b.discharge_span = IndexSpan{*first_discharge, b.last_point};
  }
}

Segmentation SegmentCycles(CanonicalDataset const& d, SegmentOptions const& opts) {
  double const eps = opts.rest_threshold.value_or(RestThreshold(d));
  auto const& pts = d.points;
  if (pts.empty()) throw Error(ErrorCode::kNoCycles, "dataset has no points");

  Segmentation out;
  out.dataset = d;
  auto& points_out = out.dataset.points;

  bool const verbatim = std::all_of(pts.begin(), pts.end(), [](DataPoint const& p) {
    return p.cycle_index.has_value();
  });
  if (!verbatim) {
    bool any_active = std::any_of(pts.begin(), pts.end(), [eps](DataPoint const& p) {
      return ActiveSign(p.current, eps) != 0;
    });
    if (!any_active) {
      throw Error(ErrorCode::kNoCycles, "current never leaves the rest band");
    }
    std::int64_t cycle = 1;
    bool seen_discharge = false;
    for (auto& p : points_out) {
      int s = ActiveSign(p.current, eps);
      if (s > 0 && seen_discharge) {
        ++cycle;
        seen_discharge = false;
      }
      if (s < 0) seen_discharge = true;
      p.cycle_index = cycle;
    }
  }

  for (std::size_t k = 0; k < points_out.size(); ++k) {
    if (k == 0 || *points_out[k].cycle_index != *points_out[k - 1].cycle_index) {
      out.cycles.push_back({*points_out[k].cycle_index, k, k, {}, {}});
    }
    out.cycles.back().last_point = k;
  }
  for (auto& b : out.cycles) AssignHalfCycleSpans(out.dataset, eps, b);

  // Step ordinal within each cycle, when the program step is known.
  bool const has_steps = std::all_of(points_out.begin(), points_out.end(),
                                     [](DataPoint const& p) { return p.step_index.has_value(); });
  bool const has_cycle_step = std::any_of(points_out.begin(), points_out.end(),
                                          [](DataPoint const& p) { return p.cycle_step.has_value(); });
  if (has_steps && !has_cycle_step) {
    for (auto const& b : out.cycles) {
      std::int64_t ordinal = 0;
      for (std::size_t k = b.first_point; k <= b.last_point; ++k) {
        if (k > b.first_point && *points_out[k].step_index != *points_out[k - 1].step_index) {
          ++ordinal;
        }
        points_out[k].cycle_step = ordinal;
      }
    }
  }
  return out;
}

}  // namespace cyclebench::engine
