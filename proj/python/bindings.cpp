#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cyclebench/analysis/dqdv.hpp"
#include "cyclebench/analysis/gitt.hpp"
#include "cyclebench/analysis/selector.hpp"
#include "cyclebench/core/columns.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/engine/cycle_stats.hpp"
#include "cyclebench/parsers/parser.hpp"

namespace py = pybind11;
using namespace cyclebench;

namespace {

parsers::ProfileRegistry& Registry() {
  static auto reg = parsers::ProfileRegistry::WithBuiltins();
  return *reg;
}

// Column name -> list of values, None where absent.
py::dict PointColumns(CanonicalDataset const& d) {
  py::list index, time, voltage, current, capacity, energy, power, temperature, cycle, step;
  auto opt = [](OptDouble const& v) { return v ? py::object(py::float_(*v)) : py::object(py::none()); };
  auto opti = [](std::optional<std::int64_t> const& v) { return v ? py::object(py::int_(*v)) : py::object(py::none()); };
  for (auto const& p : d.points) {
    index.append(p.index);
    time.append(p.time);
    voltage.append(p.voltage);
    current.append(p.current);
    capacity.append(opt(p.capacity));
    energy.append(opt(p.energy));
    power.append(opt(p.power));
    temperature.append(opt(p.temperature));
    cycle.append(opti(p.cycle_index));
    step.append(opti(p.step_index));
  }
  py::dict out;
  out["index"] = index;
  out["time"] = time;
  out["voltage"] = voltage;
  out["current"] = current;
  out["capacity"] = capacity;
  out["energy"] = energy;
  out["power"] = power;
  out["temperature"] = temperature;
  out["cycle_index"] = cycle;
  out["step_index"] = step;
  return out;
}

std::string StatsJson(CanonicalDataset const& d, std::string const& reference) {
  engine::StatsOptions opts;
  if (reference == "max") {
    opts.reference = engine::RetentionReference::kMaxCapacity;
  } else if (reference != "first") {
    throw Error(ErrorCode::kInvalidArgument, "reference must be 'first' or 'max'");
  }
  auto p = engine::ProcessDataset(d, opts);
  serialize::Json rows = serialize::Json::array();
  for (auto const& c : p.stats) rows.push_back(serialize::CycleRow(c, 0));
  return serialize::Json{{"cycles", rows}, {"rollup", serialize::RollupStatistics(p.rollup)}}.dump();
}

std::vector<std::string> Names(auto const& arr) { return {arr.begin(), arr.end()}; }

}  // namespace

PYBIND11_MODULE(_cyclebench, m) {
  m.doc() = "Native core of the cyclebench package";

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (Error const& e) {
      auto type = py::reinterpret_borrow<py::object>(error_type.ptr());
      py::object exc = type(e.what());
      exc.attr("code") = std::string(e.code_name());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<CanonicalDataset>(m, "Dataset")
      .def_readonly("channel", &CanonicalDataset::channel)
      .def_readonly("source_format", &CanonicalDataset::source_format)
      .def_readonly("unit_provenance", &CanonicalDataset::unit_provenance)
      .def_readonly("source_names", &CanonicalDataset::source_names)
      .def("__len__", [](CanonicalDataset const& d) { return d.points.size(); })
      .def("columns", &PointColumns, "Point fields as a dict of lists")
      .def("canonical_bytes", [](CanonicalDataset const& d) { return py::bytes(serialize::CanonicalBytes(d)); })
      .def("save", [](CanonicalDataset const& d, std::filesystem::path const& dir) {
        serialize::WriteDatasetDir(dir, d);
      });

  m.def("format_ids", [] { return Registry().Snapshot()->Ids(); });
  m.def("detect_format", [](std::string const& file_name, py::bytes head) {
    return Registry().DetectFormat(file_name, std::string(head));
  });
  m.def(
      "convert",
      [](py::bytes data, std::string const& file_name, std::optional<std::string> const& format_id,
         double malformed_tolerance) {
        std::string bytes = data;
        parsers::ParseOptions opts{file_name, malformed_tolerance};
        py::gil_scoped_release nogil;
        auto conv = format_id ? parsers::ConvertBytesWithProfile(*Registry().Find(*format_id), file_name, bytes, opts)
                              : parsers::ConvertBytes(*Registry().Snapshot(), file_name, bytes, opts);
        return std::make_pair(conv.format_id, conv.datasets);
      },
      py::arg("data"), py::arg("file_name"), py::arg("format_id") = py::none(),
      py::arg("malformed_tolerance") = 0.0);
  m.def("load_dataset", [](std::filesystem::path const& dir) { return serialize::ReadDatasetDir(dir); });

  m.def("_stats_json", &StatsJson, py::arg("dataset"), py::arg("reference") = "first");

  m.def(
      "dqdv",
      [](CanonicalDataset const& d, std::int64_t cycle, std::string const& direction, double dv, int smooth,
         std::optional<double> min_prominence) {
        auto c = analysis::Dqdv(d, cycle, analysis::ParseDirection(direction), {dv, smooth});
        py::list peaks;
        for (auto const& p : analysis::FindPeaks(c, min_prominence)) {
          py::dict pk;
          pk["position"] = p.position;
          pk["intensity"] = p.intensity;
          pk["prominence"] = p.prominence;
          pk["area"] = p.area;
          peaks.append(pk);
        }
        py::dict out;
        out["cycle_index"] = c.cycle_index;
        out["direction"] = std::string(analysis::DirectionName(c.direction));
        out["dv"] = c.dv;
        out["voltage"] = c.voltage_bins;
        out["dqdv"] = c.dqdv;
        out["smoothing"] = c.smoothing;
        out["total_capacity"] = c.total_capacity;
        out["peaks"] = peaks;
        return out;
      },
      py::arg("dataset"), py::arg("cycle"), py::arg("direction") = "discharge",
      py::arg("dv") = analysis::kDefaultBinWidth, py::arg("smooth_window") = 0,
      py::arg("min_prominence") = py::none());

  m.def(
      "gitt",
      [](CanonicalDataset const& d, double molar_volume_term, double contact_area, int ir_skip) {
        analysis::GittConfig cfg;
        cfg.molar_volume_term = molar_volume_term;
        cfg.contact_area = contact_area;
        cfg.ir_skip_samples = ir_skip;
        py::list out;
        for (auto const& s : analysis::Gitt(d, cfg)) {
          py::dict r;
          r["step"] = s.step;
          r["step_start_time"] = s.step_start_time;
          r["pulse_duration"] = s.pulse_duration;
          r["current"] = s.current;
          r["delta_es"] = s.delta_es;
          r["delta_et"] = s.delta_et;
          r["diffusivity"] = s.diffusivity;
          out.append(r);
        }
        return out;
      },
      py::arg("dataset"), py::arg("molar_volume_term") = 1.0, py::arg("contact_area") = 1.0,
      py::arg("ir_skip_samples") = 1);
  m.def("gitt_diffusivity", &analysis::GittDiffusivity, py::arg("tau"), py::arg("delta_es"), py::arg("delta_et"),
        py::arg("geometry") = 1.0);

  m.def(
      "resolve_cycles",
      [](std::string const& selector, std::int64_t available) {
        return analysis::ResolveCycles(analysis::ParseSelector(selector), available);
      },
      py::arg("selector"), py::arg("available"));

  m.attr("CYCLE_COLUMNS") = Names(columns::kCycleColumns);
  m.attr("ROLLUP_COLUMNS") = Names(columns::kRollupColumns);
}
