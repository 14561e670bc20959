#include "cyclebench/store/store.hpp"

#include <algorithm>
#include <cstdio>

#include "cyclebench/core/columns.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"

namespace cyclebench::store {

using Json = nlohmann::ordered_json;

Timestamp SystemNow() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

bool CanSee(ProjectRecord const& p, User const& u) {
  if (p.user_id == u.id) return true;
  return p.organization_id &&
         std::find(u.organizations.begin(), u.organizations.end(), *p.organization_id) !=
             u.organizations.end();
}

std::string FormatFileSize(std::int64_t bytes) {
  static constexpr char const* kUnits[] = {"KB", "MB", "GB", "TB"};
  if (bytes < 1024) return std::to_string(bytes) + " B";
  double v = static_cast<double>(bytes);
  std::size_t u = 0;
  v /= 1024.0;
  while (v >= 1024.0 && u + 1 < std::size(kUnits)) {
    v /= 1024.0;
    ++u;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f %s", v, kUnits[u]);
  return buf;
}

std::int64_t AssignShard(std::int64_t project_id, std::int64_t shard_count) {
  if (shard_count <= 1) return 0;
  std::uint64_t h = 14695981039346656037ull;
  for (char c : std::to_string(project_id)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return static_cast<std::int64_t>(h % static_cast<std::uint64_t>(shard_count));
}

namespace {

template <std::size_t N>
Json Columns(std::array<std::string_view, N> const& names) {
  Json cols = Json::array();
  for (auto n : names) cols.push_back(std::string(n));
  return cols;
}

Json Opt(OptDouble const& v) { return v ? Json(*v) : Json(nullptr); }
Json Opt(std::optional<std::int64_t> const& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json CyclesTable(std::vector<CycleStats> const& cycles, std::int64_t project_id) {
  Json rows = Json::array();
  for (auto const& c : cycles) {
    auto obj = serialize::CycleRow(c, project_id);
    Json row = Json::array();
    for (auto name : columns::kCycleColumns) row.push_back(obj[std::string(name)]);
    rows.push_back(std::move(row));
  }
  return Json{{"columns", Columns(columns::kCycleColumns)}, {"rows", std::move(rows)}};
}

Json DataPointsTable(CanonicalDataset const& d, std::int64_t project_id) {
  Json rows = Json::array();
  for (auto const& p : d.points) {
    rows.push_back(Json::array({
        p.index,
        Opt(p.capacity),
        p.current,
        Opt(p.cycle_index),
        Opt(p.cycle_step),
        Opt(p.energy),
        p.index,
        Opt(p.power),
        project_id,
        Opt(p.temperature),
        p.time,
        p.voltage,
        Opt(p.step_index),
        p.wall_time ? Json(text::FormatTimestamp(*p.wall_time)) : Json(nullptr),
        Opt(p.resistance),
    }));
  }
  return Json{{"columns", Columns(columns::kDataPointColumns)}, {"rows", std::move(rows)}};
}

Json TagsTable(std::vector<ProjectTag> const& tags) {
  Json rows = Json::array();
  for (auto const& t : tags) rows.push_back(Json::array({t.id, t.project_id, t.name, t.value}));
  return Json{{"columns", Columns(columns::kProjectTagColumns)}, {"rows", std::move(rows)}};
}

namespace {

Json ExtraTable(CanonicalDataset const& d) {
  Json rows = Json::array();
  std::int64_t id = 1;
  for (auto const& e : d.extra) rows.push_back(Json::array({id++, e.point_index, e.name, e.value}));
  return Json{{"columns", Json::array({"Id", "DataPoint_Id", "Name", "Value"})},
              {"rows", std::move(rows)}};
}

}  // namespace

Json QueryRowToJson(QueryRow const& r) {
  Json j;
  j["project"] = serialize::ProjectToJson(r.project);
  if (r.cycles) j["cycles"] = CyclesTable(*r.cycles, r.project.id);
  if (r.datapoints) {
    j["dataPoints"] = DataPointsTable(*r.datapoints, r.project.id);
    j["dataPointExtraData"] = ExtraTable(*r.datapoints);
  }
  if (r.tags) j["projectTags"] = TagsTable(*r.tags);
  return j;
}

Json UserToJson(User const& u) {
  return Json{{"Id", u.id}, {"Name", u.name}, {"ApiKey", u.api_key}, {"Organizations", u.organizations}};
}

User UserFromJson(Json const& j) {
  User u;
  u.id = j.at("Id").get<std::int64_t>();
  u.name = j.at("Name").get<std::string>();
  u.api_key = j.at("ApiKey").get<std::string>();
  u.organizations = j.value("Organizations", std::vector<std::int64_t>{});
  return u;
}

Json TemplateToJson(PlotTemplate const& t) {
  return Json{{"Id", t.id},         {"UserId", t.user_id},     {"Name", t.name},
              {"Kind", t.kind},     {"Selector", t.selector}, {"Formatting", t.formatting}};
}

PlotTemplate TemplateFromJson(Json const& j) {
  PlotTemplate t;
  t.id = j.at("Id").get<std::int64_t>();
  t.user_id = j.at("UserId").get<std::int64_t>();
  t.name = j.at("Name").get<std::string>();
  t.kind = j.at("Kind").get<std::string>();
  t.selector = j.value("Selector", Json::object());
  t.formatting = j.value("Formatting", Json::object());
  return t;
}

}  // namespace cyclebench::store
