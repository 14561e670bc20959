#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cyclebench/core/model.hpp"

namespace cyclebench::analysis {

enum class VariableDomain { kPoint, kCycle };

struct VariableInfo {
  std::string_view id;
  std::string_view label;
  std::string_view unit;
  VariableDomain domain;
};

std::vector<VariableInfo> const& VariableCatalog();
// Accepts aliases ("ce", "retention", "cycle_index"). Throws UnknownVariable.
VariableInfo const& LookupVariable(std::string_view id);

struct PlotSource {
  std::int64_t project_id = 0;
  std::string label;
  std::vector<CycleStats> const* cycles = nullptr;
  CanonicalDataset const* dataset = nullptr;  // needed for point-domain plots
};

struct Series {
  std::int64_t project_id = 0;
  std::string label;
  std::string variable;
  int axis = 1;  // 1 = left y axis, 2 = right
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSeries {
  std::string x_var;
  std::string y1_var;
  std::optional<std::string> y2_var;
  std::vector<Series> series;
};

inline constexpr std::size_t kDefaultMaxPoints = 5000;

struct PlotOptions {
  std::size_t max_points = kDefaultMaxPoints;
};

// One series per (project, y variable). Null y values are skipped. Throws
// MixedDomain, UnknownVariable, InvalidArgument (missing data).
PlotSeries BuildPlotSeries(std::vector<PlotSource> const& sources, std::string_view x_var,
                           std::string_view y1_var, std::optional<std::string_view> y2_var,
                           PlotOptions const& opts = {});

// Indices kept by min/max bucket decimation: first, last, and the min and
// max of each bucket, at most max_points (>= 4) in ascending order.
std::vector<std::size_t> DecimationIndices(std::vector<double> const& y, std::size_t max_points);

nlohmann::json PlotSeriesToJson(PlotSeries const& p);
PlotSeries PlotSeriesFromJson(nlohmann::json const& j);

// Header: project_id,label,<x>,<y1>[,<y2>].
std::string PlotSeriesToCsv(PlotSeries const& p);
std::string PlotSeriesToSvg(PlotSeries const& p, int width = 800, int height = 500);

}  // namespace cyclebench::analysis
