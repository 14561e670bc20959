#include "cyclebench/core/serialize.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "cyclebench/core/columns.hpp"
#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/text.hpp"

namespace cyclebench::serialize {

namespace fs = std::filesystem;

namespace {

std::string Cell(OptDouble const& v) {
  return v ? text::FormatDouble(*v) : std::string();
}

std::string Cell(std::optional<std::int64_t> const& v) {
  return v ? std::to_string(*v) : std::string();
}

OptDouble OptD(std::string const& s, std::size_t line, char const* field) {
  if (s.empty()) return std::nullopt;
  auto v = text::ParseDouble(s);
  if (!v) throw ParseError(line, std::string("bad number in ") + field);
  return v;
}

double ReqD(std::string const& s, std::size_t line, char const* field) {
  auto v = OptD(s, line, field);
  if (!v) throw ParseError(line, std::string("missing ") + field);
  return *v;
}

std::optional<std::int64_t> OptI(std::string const& s, std::size_t line,
                                 char const* field) {
  if (s.empty()) return std::nullopt;
  auto v = text::ParseInt(s);
  if (!v) throw ParseError(line, std::string("bad integer in ") + field);
  return v;
}

Json OptJ(OptDouble const& v) { return v ? Json(*v) : Json(nullptr); }

OptDouble JOpt(Json const& j, char const* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::optional<std::int64_t> JOptI(Json const& j, char const* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::int64_t>();
}

Json OptTs(std::optional<Timestamp> const& t) {
  return t ? Json(text::FormatTimestamp(*t)) : Json(nullptr);
}

std::optional<Timestamp> JOptTs(Json const& j, char const* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  auto t = text::ParseTimestamp(it->get<std::string>());
  if (!t) throw Error(ErrorCode::kInvalidArgument, std::string("bad timestamp in ") + key);
  return t;
}

std::string JStr(Json const& j, char const* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  return it->get<std::string>();
}

struct OptField {
  char const* column;
  OptDouble CycleStats::*member;
};

// Cycles columns backed by optional members.
constexpr OptField kOptCycleFields[] = {
    {"ChargeCapacityRetention", &CycleStats::charge_capacity_retention},
    {"DischargeCapacityRetention", &CycleStats::discharge_capacity_retention},
    {"DischargeEndCurrent", &CycleStats::discharge_end_current},
    {"DischargeEndVoltage", &CycleStats::discharge_end_voltage},
    {"DischargePower", &CycleStats::discharge_power},
    {"DischargeResistance", &CycleStats::discharge_resistance},
    {"EndCurrent", &CycleStats::end_current},
    {"EndRestVoltage", &CycleStats::end_rest_voltage},
    {"EndVoltage", &CycleStats::end_voltage},
    {"MidVoltage", &CycleStats::mid_voltage},
    {"Power", &CycleStats::power},
    {"ResistanceOhms", &CycleStats::resistance_ohms},
    {"StartChargeVoltage", &CycleStats::start_charge_voltage},
    {"StartCurrent", &CycleStats::start_current},
    {"StartDischargeCurrent", &CycleStats::start_discharge_current},
    {"StartDischargeVoltage", &CycleStats::start_discharge_voltage},
    {"Temperature", &CycleStats::temperature},
    {"MinimumPower", &CycleStats::minimum_power},
    {"MaximumPower", &CycleStats::maximum_power},
    {"MinimumDischargePower", &CycleStats::minimum_discharge_power},
    {"MaximumDischargePower", &CycleStats::maximum_discharge_power},
    {"AverageDischargePower", &CycleStats::average_discharge_power},
    {"AveragePower", &CycleStats::average_power},
};

constexpr OptField kStoredOnlyFields[] = {
    {"CoulombicEfficiency", &CycleStats::coulombic_efficiency},
    {"ChargeVoltage", &CycleStats::charge_voltage},
    {"DischargeVoltage", &CycleStats::discharge_voltage},
    {"Voltage", &CycleStats::voltage},
};

std::atomic<unsigned> g_tmp_counter{0};

}  // namespace

std::string PointsToCsv(std::vector<DataPoint> const& points) {
  std::string out;
  out.reserve(points.size() * 96 + 128);
  std::vector<std::string> row(columns::kPointFields.begin(),
                               columns::kPointFields.end());
  csv::AppendRow(out, row);
  for (auto const& p : points) {
    row[0] = std::to_string(p.index);
    row[1] = text::FormatDouble(p.time);
    row[2] = p.wall_time ? text::FormatTimestamp(*p.wall_time) : std::string();
    row[3] = text::FormatDouble(p.voltage);
    row[4] = text::FormatDouble(p.current);
    row[5] = Cell(p.capacity);
    row[6] = Cell(p.energy);
    row[7] = Cell(p.power);
    row[8] = Cell(p.temperature);
    row[9] = Cell(p.resistance);
    row[10] = Cell(p.cycle_index);
    row[11] = Cell(p.step_index);
    row[12] = Cell(p.cycle_step);
    csv::AppendRow(out, row);
  }
  return out;
}

std::vector<DataPoint> PointsFromCsv(std::string_view text) {
  csv::Reader reader(text);
  csv::Record rec;
  if (!reader.Next(rec)) return {};
  if (rec.fields.size() != columns::kPointFields.size()) {
    throw ParseError(rec.line, "unexpected points header");
  }
  for (std::size_t i = 0; i < rec.fields.size(); ++i) {
    if (rec.fields[i] != columns::kPointFields[i]) {
      throw ParseError(rec.line, "unexpected points header column " + rec.fields[i]);
    }
  }
  std::vector<DataPoint> out;
  while (reader.Next(rec)) {
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    if (rec.fields.size() != columns::kPointFields.size()) {
      throw ParseError(rec.line, "wrong field count");
    }
    auto const& f = rec.fields;
    DataPoint p;
    auto idx = OptI(f[0], rec.line, "index");
    if (!idx) throw ParseError(rec.line, "missing index");
    p.index = *idx;
    p.time = ReqD(f[1], rec.line, "time");
    if (!f[2].empty()) {
      p.wall_time = text::ParseTimestamp(f[2]);
      if (!p.wall_time) throw ParseError(rec.line, "bad wall_time");
    }
    p.voltage = ReqD(f[3], rec.line, "voltage");
    p.current = ReqD(f[4], rec.line, "current");
    p.capacity = OptD(f[5], rec.line, "capacity");
    p.energy = OptD(f[6], rec.line, "energy");
    p.power = OptD(f[7], rec.line, "power");
    p.temperature = OptD(f[8], rec.line, "temperature");
    p.resistance = OptD(f[9], rec.line, "resistance");
    p.cycle_index = OptI(f[10], rec.line, "cycle_index");
    p.step_index = OptI(f[11], rec.line, "step_index");
    p.cycle_step = OptI(f[12], rec.line, "cycle_step");
    out.push_back(p);
  }
  return out;
}

std::string ExtraToCsv(std::vector<ExtraDataValue> const& extra) {
  std::string out;
  std::vector<std::string> row = {"point_index", "name", "value"};
  csv::AppendRow(out, row);
  for (auto const& e : extra) {
    row[0] = std::to_string(e.point_index);
    row[1] = e.name;
    row[2] = e.value;
    csv::AppendRow(out, row);
  }
  return out;
}

std::vector<ExtraDataValue> ExtraFromCsv(std::string_view text) {
  csv::Reader reader(text);
  csv::Record rec;
  std::vector<ExtraDataValue> out;
  if (!reader.Next(rec)) return out;
  while (reader.Next(rec)) {
    if (rec.fields.size() != 3) throw ParseError(rec.line, "wrong field count");
    auto idx = text::ParseInt(rec.fields[0]);
    if (!idx) throw ParseError(rec.line, "bad point_index");
    out.push_back({*idx, rec.fields[1], rec.fields[2]});
  }
  return out;
}

Json MetaToJson(CanonicalDataset const& d) {
  Json j;
  j["channel"] = d.channel;
  j["source_format"] = d.source_format;
  Json units = Json::object();
  for (auto const& [k, v] : d.unit_provenance) units[k] = v;
  j["unit_provenance"] = units;
  j["source_names"] = d.source_names;
  return j;
}

void MetaFromJson(Json const& j, CanonicalDataset& d) {
  d.channel = j.at("channel").get<std::int64_t>();
  d.source_format = j.at("source_format").get<std::string>();
  d.unit_provenance.clear();
  for (auto const& [k, v] : j.at("unit_provenance").items()) {
    d.unit_provenance[k] = v.get<std::string>();
  }
  d.source_names.clear();
  if (j.contains("source_names")) {
    d.source_names = j["source_names"].get<std::vector<std::string>>();
  }
}

void WriteDatasetDir(fs::path const& dir, CanonicalDataset const& d) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  WriteFileAtomic(dir / "meta", MetaToJson(d).dump(2) + "\n");
  WriteFileAtomic(dir / "points", PointsToCsv(d.points));
  WriteFileAtomic(dir / "extra", ExtraToCsv(d.extra));
}

CanonicalDataset ReadDatasetDir(fs::path const& dir) {
  CanonicalDataset d;
  MetaFromJson(Json::parse(ReadFile(dir / "meta")), d);
  d.points = PointsFromCsv(ReadFile(dir / "points"));
  if (fs::exists(dir / "extra")) d.extra = ExtraFromCsv(ReadFile(dir / "extra"));
  return d;
}

std::string CanonicalBytes(CanonicalDataset const& d) {
  return MetaToJson(d).dump() + "\n" + PointsToCsv(d.points) +
         ExtraToCsv(d.extra);
}

Json CycleRow(CycleStats const& c, std::int64_t project_id) {
  Json j;
  for (auto col : columns::kCycleColumns) {
    std::string key(col);
    if (key == "ProjectId") {
      j[key] = project_id;
    } else if (key == "Index") {
      j[key] = c.cycle_index;
    } else if (key == "ChargeCapacity") {
      j[key] = c.charge_capacity;
    } else if (key == "ChargeEnergy") {
      j[key] = c.charge_energy;
    } else if (key == "DischargeCapacity") {
      j[key] = c.discharge_capacity;
    } else if (key == "DischargeEnergy") {
      j[key] = c.discharge_energy;
    } else if (key == "FirstPointIndex") {
      j[key] = c.first_point_index;
    } else if (key == "PointCount") {
      j[key] = c.point_count;
    } else if (key == "StatisticMetaData") {
      j[key] = c.statistic_metadata;
    } else {
      for (auto const& f : kOptCycleFields) {
        if (key == f.column) {
          j[key] = OptJ(c.*f.member);
          break;
        }
      }
    }
  }
  return j;
}

Json StoredCycleRow(CycleStats const& c, std::int64_t project_id) {
  Json j = CycleRow(c, project_id);
  for (auto const& f : kStoredOnlyFields) j[f.column] = OptJ(c.*f.member);
  return j;
}

CycleStats CycleFromStoredRow(Json const& j) {
  CycleStats c;
  c.cycle_index = j.at("Index").get<std::int64_t>();
  c.charge_capacity = j.at("ChargeCapacity").get<double>();
  c.charge_energy = j.at("ChargeEnergy").get<double>();
  c.discharge_capacity = j.at("DischargeCapacity").get<double>();
  c.discharge_energy = j.at("DischargeEnergy").get<double>();
  c.first_point_index = j.at("FirstPointIndex").get<std::int64_t>();
  c.point_count = j.at("PointCount").get<std::int64_t>();
  c.statistic_metadata = JStr(j, "StatisticMetaData");
  for (auto const& f : kOptCycleFields) c.*f.member = JOpt(j, f.column);
  for (auto const& f : kStoredOnlyFields) c.*f.member = JOpt(j, f.column);
  return c;
}

Json RollupStatistics(StatisticRollup const& r) {
  Json j = Json::object();
  for (auto const& e : r.entries) j[e.name] = OptJ(e.value);
  return j;
}

Json RollupToJson(StatisticRollup const& r) {
  Json j;
  j["CycleCount"] = r.cycle_count;
  j["SingleSample"] = r.single_sample;
  j["StatisticMetaData"] = RollupStatistics(r);
  return j;
}

StatisticRollup RollupFromJson(Json const& j) {
  StatisticRollup r;
  r.cycle_count = j.at("CycleCount").get<std::size_t>();
  r.single_sample = j.at("SingleSample").get<std::vector<std::string>>();
  for (auto const& [k, v] : j.at("StatisticMetaData").items()) {
    r.entries.push_back(
        {k, v.is_null() ? OptDouble() : OptDouble(v.get<double>())});
  }
  return r;
}

Json ProjectToJson(ProjectRecord const& p) {
  Json j;
  j["Id"] = p.id;
  j["Name"] = p.name;
  j["FileName"] = p.file_name;
  j["InternalFileName"] = p.internal_file_name;
  j["FileSize"] = p.file_size;
  j["Channel"] = p.channel;
  j["NumCycles"] = p.num_cycles;
  j["TestName"] = p.test_name;
  j["TestType"] = p.test_type;
  j["Comments"] = p.comments;
  j["Tag"] = p.tag;
  j["Mass"] = OptJ(p.mass);
  j["PAMMass"] = OptJ(p.pam_mass);
  j["NAMMass"] = OptJ(p.nam_mass);
  j["Area"] = OptJ(p.area);
  j["ActiveMaterialFraction"] = OptJ(p.active_material_fraction);
  j["TheoreticalCapacity"] = OptJ(p.theoretical_capacity);
  j["Status"] = ProjectStatusName(p.status);
  j["Error"] = p.error;
  j["ErrorDetailed"] = p.error_detailed;
  j["ProcessingMessage"] = p.processing_message;
  j["CreatedAt"] = OptTs(p.created_at);
  j["UpdatedAt"] = OptTs(p.updated_at);
  j["TestDate"] = OptTs(p.test_date);
  j["ProcessDate"] = OptTs(p.process_date);
  j["Shard_Id"] = p.shard_id;
  j["Organization_OrganizationId"] =
      p.organization_id ? Json(*p.organization_id) : Json(nullptr);
  j["UserId"] = p.user_id;
  j["StitchedFrom"] = p.stitched_from ? Json(*p.stitched_from) : Json(nullptr);
  j["StitchedFromNames"] = p.stitched_from_names;
  j["IsRealTime"] = p.is_real_time;
  j["JobId"] = p.job_id ? Json(*p.job_id) : Json(nullptr);
  Json opaque = Json::object();
  for (auto const& [k, v] : p.opaque) opaque[k] = v;
  j["Opaque"] = opaque;
  return j;
}

ProjectRecord ProjectFromJson(Json const& j) {
  ProjectRecord p;
  p.id = j.at("Id").get<std::int64_t>();
  p.name = JStr(j, "Name");
  p.file_name = JStr(j, "FileName");
  p.internal_file_name = JStr(j, "InternalFileName");
  p.file_size = JOptI(j, "FileSize").value_or(0);
  p.channel = JOptI(j, "Channel").value_or(0);
  p.num_cycles = JOptI(j, "NumCycles").value_or(0);
  p.test_name = JStr(j, "TestName");
  p.test_type = JStr(j, "TestType");
  p.comments = JStr(j, "Comments");
  p.tag = JStr(j, "Tag");
  p.mass = JOpt(j, "Mass");
  p.pam_mass = JOpt(j, "PAMMass");
  p.nam_mass = JOpt(j, "NAMMass");
  p.area = JOpt(j, "Area");
  p.active_material_fraction = JOpt(j, "ActiveMaterialFraction");
  p.theoretical_capacity = JOpt(j, "TheoreticalCapacity");
  p.status = ParseProjectStatus(JStr(j, "Status").empty() ? "Pending"
                                                          : JStr(j, "Status"));
  p.error = JStr(j, "Error");
  p.error_detailed = JStr(j, "ErrorDetailed");
  p.processing_message = JStr(j, "ProcessingMessage");
  p.created_at = JOptTs(j, "CreatedAt");
  p.updated_at = JOptTs(j, "UpdatedAt");
  p.test_date = JOptTs(j, "TestDate");
  p.process_date = JOptTs(j, "ProcessDate");
  p.shard_id = JOptI(j, "Shard_Id").value_or(0);
  p.organization_id = JOptI(j, "Organization_OrganizationId");
  p.user_id = JOptI(j, "UserId").value_or(0);
  if (j.contains("StitchedFrom") && !j["StitchedFrom"].is_null()) {
    p.stitched_from = j["StitchedFrom"].get<std::vector<std::int64_t>>();
  }
  if (j.contains("StitchedFromNames")) {
    p.stitched_from_names = j["StitchedFromNames"].get<std::vector<std::string>>();
  }
  p.is_real_time = j.value("IsRealTime", false);
  p.job_id = JOptI(j, "JobId");
  if (j.contains("Opaque")) {
    for (auto const& [k, v] : j["Opaque"].items()) p.opaque[k] = v.get<std::string>();
  }
  return p;
}

Json TagToJson(ProjectTag const& t) {
  Json j;
  j["Id"] = t.id;
  j["Name"] = t.name;
  j["Value"] = t.value;
  j["ProjectId"] = t.project_id;
  return j;
}

ProjectTag TagFromJson(Json const& j) {
  return {j.at("Id").get<std::int64_t>(), j.at("ProjectId").get<std::int64_t>(),
          j.at("Name").get<std::string>(), j.at("Value").get<std::string>()};
}

std::string ReadFile(fs::path const& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(fs::path const& p, std::string_view bytes) {
  auto tmp = p;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" +
         std::to_string(g_tmp_counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "short write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + p.string());
  }
}

}  // namespace cyclebench::serialize
