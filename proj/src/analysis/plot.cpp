#include "cyclebench/analysis/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/text.hpp"

namespace cyclebench::analysis {

namespace {

using D = VariableDomain;

std::vector<VariableInfo> const kCatalog = {
    {"time", "Test time", "s", D::kPoint},
    {"voltage", "Voltage", "V", D::kPoint},
    {"current", "Current", "A", D::kPoint},
    {"capacity", "Capacity", "Ah", D::kPoint},
    {"energy", "Energy", "Wh", D::kPoint},
    {"power", "Power", "W", D::kPoint},
    {"temperature", "Temperature", "degC", D::kPoint},
    {"cycle", "Cycle number", "", D::kCycle},
    {"charge_capacity", "Charge capacity", "Ah", D::kCycle},
    {"discharge_capacity", "Discharge capacity", "Ah", D::kCycle},
    {"charge_energy", "Charge energy", "Wh", D::kCycle},
    {"discharge_energy", "Discharge energy", "Wh", D::kCycle},
    {"coulombic_efficiency", "Coulombic efficiency", "", D::kCycle},
    {"charge_capacity_retention", "Charge capacity retention", "", D::kCycle},
    {"discharge_capacity_retention", "Discharge capacity retention", "", D::kCycle},
    {"mid_voltage", "Mid voltage", "V", D::kCycle},
    {"end_voltage", "End of charge voltage", "V", D::kCycle},
    {"discharge_end_voltage", "End of discharge voltage", "V", D::kCycle},
    {"average_power", "Average power", "W", D::kCycle},
    {"resistance", "Resistance", "Ohm", D::kCycle},
    {"cycle_temperature", "Cycle temperature", "degC", D::kCycle},
};

std::map<std::string_view, std::string_view> const kAliases = {
    {"cycle_index", "cycle"},
    {"ce", "coulombic_efficiency"},
    {"retention", "discharge_capacity_retention"},
};

OptDouble CycleValue(std::string_view id, CycleStats const& c) {
  if (id == "cycle") return static_cast<double>(c.cycle_index);
  if (id == "charge_capacity") return c.charge_capacity;
  if (id == "discharge_capacity") return c.discharge_capacity;
  if (id == "charge_energy") return c.charge_energy;
  if (id == "discharge_energy") return c.discharge_energy;
  if (id == "coulombic_efficiency") return c.coulombic_efficiency;
  if (id == "charge_capacity_retention") return c.charge_capacity_retention;
  if (id == "discharge_capacity_retention") return c.discharge_capacity_retention;
  if (id == "mid_voltage") return c.mid_voltage;
  if (id == "end_voltage") return c.end_voltage;
  if (id == "discharge_end_voltage") return c.discharge_end_voltage;
  if (id == "average_power") return c.average_power;
  if (id == "resistance") return c.resistance_ohms;
  if (id == "cycle_temperature") return c.temperature;
  return std::nullopt;
}

OptDouble PointValue(std::string_view id, DataPoint const& p) {
  if (id == "time") return p.time;
  if (id == "voltage") return p.voltage;
  if (id == "current") return p.current;
  if (id == "capacity") return p.capacity;
  if (id == "energy") return p.energy;
  if (id == "power") return p.power;
  if (id == "temperature") return p.temperature;
  return std::nullopt;
}

Series MakeSeries(PlotSource const& src, VariableInfo const& x, VariableInfo const& y, int axis,
                  PlotOptions const& opts) {
  Series s;
  s.project_id = src.project_id;
  s.label = src.label;
  s.variable = std::string(y.id);
  s.axis = axis;
  if (x.domain == D::kCycle) {
    if (!src.cycles) {
      throw Error(ErrorCode::kInvalidArgument,
                  "project " + std::to_string(src.project_id) + " has no cycle data");
    }
    for (auto const& c : *src.cycles) {
      auto xv = CycleValue(x.id, c);
      auto yv = CycleValue(y.id, c);
      if (xv && yv) {
        s.x.push_back(*xv);
        s.y.push_back(*yv);
      }
    }
    return s;
  }
  if (!src.dataset) {
    throw Error(ErrorCode::kInvalidArgument,
                "project " + std::to_string(src.project_id) + " has no time-series data");
  }
  std::vector<double> xs, ys;
  for (auto const& p : src.dataset->points) {
    auto xv = PointValue(x.id, p);
    auto yv = PointValue(y.id, p);
    if (xv && yv) {
      xs.push_back(*xv);
      ys.push_back(*yv);
    }
  }
  if (xs.size() > opts.max_points) {
    for (auto k : DecimationIndices(ys, opts.max_points)) {
      s.x.push_back(xs[k]);
      s.y.push_back(ys[k]);
    }
  } else {
    s.x = std::move(xs);
    s.y = std::move(ys);
  }
  return s;
}

}  // namespace

std::vector<VariableInfo> const& VariableCatalog() { return kCatalog; }

VariableInfo const& LookupVariable(std::string_view id) {
  if (auto a = kAliases.find(id); a != kAliases.end()) id = a->second;
  for (auto const& v : kCatalog) {
    if (v.id == id) return v;
  }
  throw Error(ErrorCode::kUnknownVariable, "unknown variable '" + std::string(id) + "'");
}

std::vector<std::size_t> DecimationIndices(std::vector<double> const& y, std::size_t max_points) {
  std::size_t const n = y.size();
  std::vector<std::size_t> out;
  if (n <= max_points) {
    for (std::size_t k = 0; k < n; ++k) out.push_back(k);
    return out;
  }
  max_points = std::max<std::size_t>(max_points, 4);
  std::size_t const buckets = (max_points - 2) / 2;
  std::size_t const interior = n - 2;
  out.push_back(0);
  for (std::size_t b = 0; b < buckets; ++b) {
    std::size_t const lo = 1 + b * interior / buckets;
    std::size_t const hi = 1 + (b + 1) * interior / buckets;
    if (lo >= hi) continue;
    auto first = y.begin() + static_cast<std::ptrdiff_t>(lo);
    auto last = y.begin() + static_cast<std::ptrdiff_t>(hi);
    auto [mn, mx] = std::minmax_element(first, last);
    auto a = static_cast<std::size_t>(mn - y.begin());
    auto c = static_cast<std::size_t>(mx - y.begin());
    if (a > c) std::swap(a, c);
    out.push_back(a);
    if (c != a) out.push_back(c);
  }
  out.push_back(n - 1);
  return out;
}

PlotSeries BuildPlotSeries(std::vector<PlotSource> const& sources, std::string_view x_var,
                           std::string_view y1_var, std::optional<std::string_view> y2_var,
                           PlotOptions const& opts) {
  auto const& x = LookupVariable(x_var);
  std::vector<VariableInfo const*> ys{&LookupVariable(y1_var)};
  if (y2_var) ys.push_back(&LookupVariable(*y2_var));
  for (auto const* y : ys) {
    if (y->domain != x.domain) {
      throw Error(ErrorCode::kMixedDomain,
                  "x '" + std::string(x.id) + "' and y '" + std::string(y->id) +
                      "' come from different tables");
    }
  }
  PlotSeries out;
  out.x_var = std::string(x.id);
  out.y1_var = std::string(ys[0]->id);
  if (ys.size() > 1) out.y2_var = std::string(ys[1]->id);
  for (auto const& src : sources) {
    for (std::size_t a = 0; a < ys.size(); ++a) {
      out.series.push_back(MakeSeries(src, x, *ys[a], static_cast<int>(a + 1), opts));
    }
  }
  return out;
}

nlohmann::json PlotSeriesToJson(PlotSeries const& p) {
  nlohmann::json j;
  j["x"] = p.x_var;
  j["y1"] = p.y1_var;
  j["y2"] = p.y2_var ? nlohmann::json(*p.y2_var) : nlohmann::json(nullptr);
  j["series"] = nlohmann::json::array();
  for (auto const& s : p.series) {
    j["series"].push_back({{"project_id", s.project_id},
                           {"label", s.label},
                           {"variable", s.variable},
                           {"axis", s.axis},
                           {"x", s.x},
                           {"y", s.y}});
  }
  return j;
}

PlotSeries PlotSeriesFromJson(nlohmann::json const& j) {
  PlotSeries p;
  p.x_var = j.at("x").get<std::string>();
  p.y1_var = j.at("y1").get<std::string>();
  if (j.contains("y2") && !j["y2"].is_null()) p.y2_var = j["y2"].get<std::string>();
  for (auto const& s : j.at("series")) {
    Series out;
    out.project_id = s.at("project_id").get<std::int64_t>();
    out.label = s.at("label").get<std::string>();
    out.variable = s.at("variable").get<std::string>();
    out.axis = s.at("axis").get<int>();
    out.x = s.at("x").get<std::vector<double>>();
    out.y = s.at("y").get<std::vector<double>>();
    p.series.push_back(std::move(out));
  }
  return p;
}

std::string PlotSeriesToCsv(PlotSeries const& p) {
  std::string out;
  std::vector<std::string> header{"project_id", "label", p.x_var, p.y1_var};
  if (p.y2_var) header.push_back(*p.y2_var);
  csv::AppendRow(out, header);

  // Rows per project keyed by x, in order of first appearance of the project.
  std::vector<std::int64_t> order;
  std::map<std::int64_t, std::string> labels;
  std::map<std::int64_t, std::map<double, std::pair<OptDouble, OptDouble>>> rows;
  for (auto const& s : p.series) {
    if (!labels.count(s.project_id)) {
      order.push_back(s.project_id);
      labels[s.project_id] = s.label;
    }
    auto& table = rows[s.project_id];
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      auto& cell = table[s.x[k]];
      (s.axis == 1 ? cell.first : cell.second) = s.y[k];
    }
  }
  for (auto id : order) {
    for (auto const& [xv, ys] : rows[id]) {
      std::vector<std::string> row{std::to_string(id), labels[id], text::FormatDouble(xv),
                                   ys.first ? text::FormatDouble(*ys.first) : ""};
      if (p.y2_var) row.push_back(ys.second ? text::FormatDouble(*ys.second) : "");
      csv::AppendRow(out, row);
    }
  }
  return out;
}

namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  bool set = false;
  void Add(double v) {
    if (!std::isfinite(v)) return;
    if (!set) {
      lo = hi = v;
      set = true;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Pad() {
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

constexpr char const* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string PlotSeriesToSvg(PlotSeries const& p, int width, int height) {
  double const left = 70, right = p.y2_var ? 70 : 20, top = 20, bottom = 50;
  double const pw = width - left - right;
  double const ph = height - top - bottom;
  Range xr, y1r, y2r;
  for (auto const& s : p.series) {
    for (double v : s.x) xr.Add(v);
    for (double v : s.y) (s.axis == 1 ? y1r : y2r).Add(v);
  }
  xr.Pad();
  y1r.Pad();
  y2r.Pad();
  auto sx = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double v, Range const& r) { return top + ph - (v - r.lo) / (r.hi - r.lo) * ph; };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect x=\"" + Num(left) + "\" y=\"" + Num(top) + "\" width=\"" + Num(pw) +
         "\" height=\"" + Num(ph) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    double f = t / 4.0;
    double xv = xr.lo + f * (xr.hi - xr.lo);
    out += "<text x=\"" + Num(sx(xv)) + "\" y=\"" + Num(top + ph + 15) +
           "\" text-anchor=\"middle\">" + Tick(xv) + "</text>\n";
    double yv = y1r.lo + f * (y1r.hi - y1r.lo);
    out += "<text x=\"" + Num(left - 5) + "\" y=\"" + Num(sy(yv, y1r) + 4) +
           "\" text-anchor=\"end\">" + Tick(yv) + "</text>\n";
    if (p.y2_var) {
      double y2v = y2r.lo + f * (y2r.hi - y2r.lo);
      out += "<text x=\"" + Num(left + pw + 5) + "\" y=\"" + Num(sy(y2v, y2r) + 4) + "\">" +
             Tick(y2v) + "</text>\n";
    }
  }
  out += "<text x=\"" + Num(left + pw / 2) + "\" y=\"" + Num(height - 10.0) +
         "\" text-anchor=\"middle\">" + XmlEscape(p.x_var) + "</text>\n";
  out += "<text x=\"15\" y=\"" + Num(top + ph / 2) + "\" transform=\"rotate(-90 15 " +
         Num(top + ph / 2) + ")\" text-anchor=\"middle\">" + XmlEscape(p.y1_var) + "</text>\n";
  if (p.y2_var) {
    double xl = width - 15.0;
    out += "<text x=\"" + Num(xl) + "\" y=\"" + Num(top + ph / 2) + "\" transform=\"rotate(90 " +
           Num(xl) + " " + Num(top + ph / 2) + ")\" text-anchor=\"middle\">" +
           XmlEscape(*p.y2_var) + "</text>\n";
  }
  std::size_t color = 0;
  for (auto const& s : p.series) {
    Range const& r = s.axis == 1 ? y1r : y2r;
    out += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[color++ % std::size(kPalette)]) +
           "\"" + (s.axis == 2 ? " stroke-dasharray=\"4 2\"" : "") + " points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (k) out += ' ';
      out += Num(sx(s.x[k])) + "," + Num(sy(s.y[k], r));
    }
    out += "\"><title>" + XmlEscape(s.label + " " + s.variable) + "</title></polyline>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cyclebench::analysis
