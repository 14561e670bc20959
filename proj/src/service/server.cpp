#include "cyclebench/service/server.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "cyclebench/analysis/dqdv.hpp"
#include "cyclebench/analysis/plot.hpp"
#include "cyclebench/analysis/selector.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"
#include "cyclebench/parsers/profile.hpp"
#include "cyclebench/service/pipeline.hpp"

namespace cyclebench::service {

namespace {

#include "openapi.inc"

}  // namespace

std::string_view OpenApiDocument() { return kOpenApiJson; }

using Json = nlohmann::ordered_json;
using httplib::Request;
using httplib::Response;

ServiceConfig ServiceConfig::FromEnv() {
  ServiceConfig cfg;
  if (auto const* v = std::getenv("CYCLEBENCH_DATA_DIR"); v && *v) cfg.data_dir = v;
  if (auto const* v = std::getenv("CYCLEBENCH_BIND_ADDR"); v && *v) cfg.bind_addr = v;
  if (auto const* v = std::getenv("CYCLEBENCH_SHARDS"); v && *v) {
    auto n = text::ParseInt(v);
    if (!n || *n < 1) throw Error(ErrorCode::kInvalidArgument, "CYCLEBENCH_SHARDS must be a positive integer");
    cfg.shards = *n;
  }
  if (auto const* v = std::getenv("CYCLEBENCH_RETENTION_DAYS"); v && *v) {
    auto n = text::ParseInt(v);
    if (!n || *n < 0) {
      throw Error(ErrorCode::kInvalidArgument, "CYCLEBENCH_RETENTION_DAYS must be a non-negative integer");
    }
    cfg.retention_days = static_cast<int>(*n);
  }
  return cfg;
}

std::pair<std::string, int> SplitBindAddr(std::string const& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "bind address needs host:port");
  auto port = text::ParseInt(addr.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in bind address '" + addr + "'");
  }
  return {addr.substr(0, colon), static_cast<int>(*port)};
}

namespace {

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kValidationError: return 400;
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kForbidden: return 403;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kShardUnavailable: return 503;
    case ErrorCode::kIoError: return 500;
    default: return 422;
  }
}

void SendJson(Response& res, Json const& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(Response& res, int status, std::string_view code, std::string_view message) {
  SendJson(res, Json{{"error", code}, {"message", message}}, status);
}

Json ParseBody(Request const& req) {
  if (req.body.empty()) return Json::object();
  try {
    auto j = Json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
    return j;
  } catch (Json::exception const& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

std::int64_t PathId(Request const& req, std::size_t group = 1) {
  auto v = text::ParseInt(req.matches[group].str());
  if (!v) throw Error(ErrorCode::kInvalidArgument, "bad id in path");
  return *v;
}

template <class T>
std::optional<T> Field(Json const& j, char const* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  try {
    return j[key].get<T>();
  } catch (Json::exception const&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' has the wrong type");
  }
}

std::string const& RequireString(Json const& j, char const* key) {
  if (!j.contains(key) || !j[key].is_string() || text::Trim(j[key].get_ref<std::string const&>()).empty()) {
    throw Error(ErrorCode::kValidationError, std::string("'") + key + "' is required");
  }
  return j[key].get_ref<std::string const&>();
}

std::optional<std::string> BearerKey(Request const& req) {
  auto h = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (h.size() <= kPrefix.size() || !std::string_view(h).starts_with(kPrefix)) return std::nullopt;
  return std::string(text::Trim(std::string_view(h).substr(kPrefix.size())));
}

constexpr std::string_view kTemplateKinds[] = {"cycle-stats", "voltage-profile", "dqdv"};

Json ProjectListRow(ProjectRecord const& p) {
  Json row;
  row["Id"] = p.id;
  row["Name"] = p.name;
  row["FileName"] = p.file_name;
  row["TestName"] = p.test_name;
  row["TestType"] = p.test_type;
  row["FileSize"] = p.file_size;
  row["FileSizeText"] = store::FormatFileSize(p.file_size);
  row["Channel"] = p.channel;
  row["NumCycles"] = p.num_cycles;
  row["CreatedAt"] = p.created_at ? Json(text::FormatTimestamp(*p.created_at)) : Json(nullptr);
  row["Status"] = ProjectStatusName(p.status);
  row["StatusColor"] = StatusColor(p.status);
  row["Error"] = p.error;
  row["ProcessingMessage"] = p.processing_message;
  row["Organization_OrganizationId"] = p.organization_id ? Json(*p.organization_id) : Json(nullptr);
  return row;
}

std::set<std::string> const kMetadataKeys = {
    "name", "test_name", "test_type", "comments", "tag", "mass", "pam_mass", "nam_mass", "area",
    "active_material_fraction", "theoretical_capacity", "is_real_time"};

ProjectRecord ApplyMetadata(ProjectRecord p, Json const& meta) {
  if (!meta.is_object()) throw Error(ErrorCode::kInvalidArgument, "metadata must be an object");
  for (auto const& [key, v] : meta.items()) {
    if (!kMetadataKeys.count(key)) throw Error(ErrorCode::kValidationError, "unknown metadata field '" + key + "'");
  }
  if (auto v = Field<std::string>(meta, "name")) p.name = *v;
  if (auto v = Field<std::string>(meta, "test_name")) p.test_name = *v;
  if (auto v = Field<std::string>(meta, "test_type")) p.test_type = *v;
  if (auto v = Field<std::string>(meta, "comments")) p.comments = *v;
  if (auto v = Field<std::string>(meta, "tag")) p.tag = *v;
  if (auto v = Field<double>(meta, "mass")) p.mass = *v;
  if (auto v = Field<double>(meta, "pam_mass")) p.pam_mass = *v;
  if (auto v = Field<double>(meta, "nam_mass")) p.nam_mass = *v;
  if (auto v = Field<double>(meta, "area")) p.area = *v;
  if (auto v = Field<double>(meta, "active_material_fraction")) p.active_material_fraction = *v;
  if (auto v = Field<double>(meta, "theoretical_capacity")) p.theoretical_capacity = *v;
  if (auto v = Field<bool>(meta, "is_real_time")) p.is_real_time = *v;
  return p;
}

analysis::PlotSeries PerCycleSeries(std::string const& kind, std::int64_t project_id,
                                    CanonicalDataset const& d, std::vector<std::int64_t> const& cycles,
                                    Json const& formatting) {
  auto dir = analysis::ParseDirection(formatting.value("direction", std::string("discharge")));
  analysis::PlotSeries plot;
  if (kind == "voltage-profile") {
    plot.x_var = "capacity";
    plot.y1_var = "voltage";
  } else {
    plot.x_var = "voltage";
    plot.y1_var = "dqdv";
  }
  for (auto cycle : cycles) {
    analysis::Series s;
    s.project_id = project_id;
    s.label = "Cycle " + std::to_string(cycle);
    s.variable = plot.y1_var;
    if (kind == "voltage-profile") {
      for (auto const& pt : analysis::VoltageProfile(d, cycle, dir)) {
        s.x.push_back(pt.capacity);
        s.y.push_back(pt.voltage);
      }
    } else {
      analysis::DqdvOptions opts;
      opts.dv = formatting.value("dv", analysis::kDefaultBinWidth);
      opts.smooth_window = formatting.value("smooth_window", 0);
      auto c = analysis::Dqdv(d, cycle, dir, opts);
      s.x = c.voltage_bins;
      s.y = c.dqdv;
    }
    plot.series.push_back(std::move(s));
  }
  return plot;
}

std::vector<std::int64_t> ResolveAgainst(analysis::CycleSelector const& sel,
                                         std::vector<CycleStats> const& stats) {
  std::int64_t max_cycle = 0;
  std::set<std::int64_t> present;
  for (auto const& c : stats) {
    max_cycle = std::max(max_cycle, c.cycle_index);
    present.insert(c.cycle_index);
  }
  if (max_cycle < 1) throw Error(ErrorCode::kEmptySelection, "project has no cycles");
  std::vector<std::int64_t> out;
  for (auto k : analysis::ResolveCycles(sel, max_cycle)) {
    if (present.count(k)) out.push_back(k);
  }
  if (out.empty()) throw Error(ErrorCode::kEmptySelection, "selector matches no stored cycle");
  return out;
}

}  // namespace

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  std::filesystem::create_directories(cfg_.data_dir);
  store_ = store::OpenFileStore(cfg_.data_dir / "store", {cfg_.shards, cfg_.clock});
  profiles_ = parsers::ProfileRegistry::WithBuiltins();
  if (cfg_.profiles_dir) {
    for (auto& p : parsers::LoadProfilesDir(*cfg_.profiles_dir)) profiles_->Register(std::move(p));
  }
  uploads_ = std::make_unique<UploadManager>(cfg_.data_dir / "uploads");
  jobs_ = std::make_unique<JobQueue>(
      cfg_.data_dir / "jobs" / "journal.jsonl",
      [this](Job const& job) {
        auto p = store_->GetProject(job.project_id);
        p.job_id = job.id;
        store_->UpdateProject(p);
        auto bytes = store_->ReadFileVersion(job.project_id, job.file_version);
        auto result = IngestFile(*store_, *profiles_->Snapshot(), job.project_id, bytes, job.format_id);
        spdlog::info("job {}: {} -> projects {}", job.id, result.format_id,
                     fmt::join(result.project_ids, ","));
        return result.project_ids;
      },
      cfg_.workers, cfg_.clock);
  http_ = std::make_unique<httplib::Server>();
  Routes();
}

Service::~Service() { Stop(); }

int Service::Start(std::string const& host, int port) {
  int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  server_thread_ = std::thread([this] { http_->listen_after_bind(); });
  sweep_thread_ = std::thread([this] { SweepLoop(); });
  http_->wait_until_ready();
  return bound;
}

void Service::Listen(std::string const& host, int port) {
  if (!http_->bind_to_port(host, port)) {
    throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  sweep_thread_ = std::thread([this] { SweepLoop(); });
  spdlog::info("listening on {}:{}", host, port);
  http_->listen_after_bind();
}

void Service::Stop() {
  {
    std::lock_guard lock(sweep_mu_);
    stopping_ = true;
  }
  sweep_cv_.notify_all();
  if (http_) http_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  if (sweep_thread_.joinable()) sweep_thread_.join();
  if (jobs_) jobs_->Stop();
}

std::vector<store::FileVersion> Service::SweepNow() {
  auto deleted = store_->RetentionSweep(cfg_.clock(), cfg_.retention_days);
  if (!deleted.empty()) spdlog::info("retention sweep removed {} file version(s)", deleted.size());
  return deleted;
}

void Service::SweepLoop() {
  std::unique_lock lock(sweep_mu_);
  while (!stopping_) {
    lock.unlock();
    try {
      SweepNow();
    } catch (std::exception const& e) {
      spdlog::error("retention sweep failed: {}", e.what());
    }
    lock.lock();
    sweep_cv_.wait_for(lock, std::chrono::hours(24), [this] { return stopping_; });
  }
}

void Service::Routes() {
  auto& http = *http_;
  using Handler = std::function<void(Request const&, Response&, store::User const&)>;

  auto authed = [this](Handler h) {
    return [this, h = std::move(h)](Request const& req, Response& res) {
      try {
        auto key = BearerKey(req);
        auto user = key ? store_->FindUserByKey(*key) : std::nullopt;
        if (!user) throw Error(ErrorCode::kUnauthorized, key ? "invalid API key" : "missing bearer API key");
        h(req, res, *user);
      } catch (Error const& e) {
        SendError(res, HttpStatus(e.code()), e.code_name(), e.what());
      } catch (std::exception const& e) {
        spdlog::error("{} {}: {}", req.method, req.path, e.what());
        SendError(res, 500, "Internal", e.what());
      }
    };
  };

  // Project lookups never reveal projects outside the caller's scope.
  auto visible = [this](std::int64_t id, store::User const& u) {
    ProjectRecord p;
    try {
      p = store_->GetProject(id);
    } catch (Error const&) {
      throw Error(ErrorCode::kNotFound, "project " + std::to_string(id));
    }
    if (!store::CanSee(p, u)) throw Error(ErrorCode::kNotFound, "project " + std::to_string(id));
    return p;
  };

  http.Get("/api/health", [](Request const&, Response& res) { SendJson(res, Json{{"status", "ok"}}); });
  http.Get("/api/openapi.json", [](Request const&, Response& res) {
    res.set_content(std::string(OpenApiDocument()), "application/json");
  });

  http.Post("/api/uploads", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto body = ParseBody(req);
    UploadRequest r;
    r.name = RequireString(body, "name");
    r.file_name = RequireString(body, "file_name");
    auto size = Field<std::int64_t>(body, "size");
    if (!size) throw Error(ErrorCode::kValidationError, "'size' is required");
    r.size = *size;
    r.chunk_size = Field<std::int64_t>(body, "chunk_size").value_or(kDefaultChunkSize);
    r.project_id = Field<std::int64_t>(body, "project_id");
    r.format_id = Field<std::string>(body, "format_id");
    if (body.contains("metadata")) r.metadata = body["metadata"];
    r.user_id = u.id;
    if (r.project_id) visible(*r.project_id, u);
    if (r.format_id) profiles_->Find(*r.format_id);
    ApplyMetadata(ProjectRecord{}, r.metadata);
    SendJson(res, SessionToJson(uploads_->Declare(std::move(r))), 201);
  }));

  http.Get(R"(/api/uploads/([0-9a-f]+))", authed([this](Request const& req, Response& res, store::User const& u) {
    auto s = uploads_->Get(req.matches[1].str());
    if (s.request.user_id != u.id) throw Error(ErrorCode::kNotFound, "upload " + s.id);
    SendJson(res, SessionToJson(s));
  }));

  http.Put(R"(/api/uploads/([0-9a-f]+)/chunks/(\d+))",
           authed([this](Request const& req, Response& res, store::User const& u) {
             auto id = req.matches[1].str();
             if (uploads_->Get(id).request.user_id != u.id) throw Error(ErrorCode::kNotFound, "upload " + id);
             auto n = text::ParseInt(req.matches[2].str());
             if (!n) throw Error(ErrorCode::kInvalidArgument, "bad chunk index");
             std::optional<std::string> digest;
             if (req.has_header("X-Chunk-Digest")) digest = req.get_header_value("X-Chunk-Digest");
             auto s = uploads_->PutChunk(id, *n, req.body, digest);
             SendJson(res, Json{{"upload_id", s.id},
                                {"chunk", *n},
                                {"digest", *s.chunk_digests[static_cast<std::size_t>(*n)]},
                                {"received", s.received()},
                                {"chunk_count", s.chunk_count}});
           }));

  http.Post(R"(/api/uploads/([0-9a-f]+)/complete)",
            authed([this, visible](Request const& req, Response& res, store::User const& u) {
              auto id = req.matches[1].str();
              if (uploads_->Get(id).request.user_id != u.id) throw Error(ErrorCode::kNotFound, "upload " + id);
              auto body = ParseBody(req);
              auto file = uploads_->Complete(id, Field<std::string>(body, "digest"));
              auto const& r = file.session.request;

              ProjectRecord p;
              if (r.project_id) {
                p = ApplyMetadata(visible(*r.project_id, u), r.metadata);
                p.file_size = r.size;
                p.file_name = r.file_name;
                p.status = ProjectStatus::kPending;
                p.error.clear();
                p.error_detailed.clear();
                store_->UpdateProject(p);
              } else {
                ProjectRecord draft = ApplyMetadata(ProjectRecord{}, r.metadata);
                draft.name = r.name;
                draft.file_name = r.file_name;
                draft.file_size = r.size;
                draft.user_id = u.id;
                auto pid = store_->CreateProject(draft);
                p = store_->GetProject(pid);
                p.internal_file_name = std::to_string(pid) + "/" + r.file_name;
                store_->UpdateProject(p);
              }
              auto version = store_->StoreFileVersion(p.id, file.bytes);
              auto job = jobs_->Submit(p.id, version.version, r.format_id);
              Json out = JobToJson(job);
              out["digest"] = file.digest;
              out["size"] = static_cast<std::int64_t>(file.bytes.size());
              SendJson(res, out, 202);
            }));

  http.Get(R"(/api/jobs/(\d+))", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto job = jobs_->Get(PathId(req));
    visible(job.project_id, u);
    SendJson(res, JobToJson(job));
  }));

  http.Get("/api/projects", authed([this](Request const& req, Response& res, store::User const& u) {
    std::string filter = req.has_param("filter") ? req.get_param_value("filter") : "";
    std::size_t offset = 0;
    std::optional<std::size_t> limit;
    if (req.has_param("offset")) {
      auto v = text::ParseInt(req.get_param_value("offset"));
      if (!v || *v < 0) throw Error(ErrorCode::kInvalidArgument, "bad offset");
      offset = static_cast<std::size_t>(*v);
    }
    if (req.has_param("limit")) {
      auto v = text::ParseInt(req.get_param_value("limit"));
      if (!v || *v < 0) throw Error(ErrorCode::kInvalidArgument, "bad limit");
      limit = static_cast<std::size_t>(*v);
    }
    std::vector<ProjectRecord> rows;
    for (auto const& p : store_->ListProjects()) {
      if (!store::CanSee(p, u)) continue;
      if (!filter.empty() && !text::ContainsIgnoreCase(p.name, filter) &&
          !text::ContainsIgnoreCase(p.file_name, filter) && !text::ContainsIgnoreCase(p.test_name, filter)) {
        continue;
      }
      rows.push_back(p);
    }
    std::size_t const total = rows.size();
    std::size_t const begin = std::min(offset, total);
    std::size_t const end = limit ? std::min(total, begin + *limit) : total;

    // Groups keep the order in which their first project appears.
    std::vector<std::string> order;
    std::map<std::string, Json> groups;
    for (std::size_t k = begin; k < end; ++k) {
      auto const& p = rows[k];
      if (!groups.count(p.name)) {
        order.push_back(p.name);
        groups[p.name] = Json::array();
      }
      groups[p.name].push_back(ProjectListRow(p));
    }
    Json out;
    out["total"] = total;
    out["offset"] = begin;
    out["groups"] = Json::array();
    for (auto const& name : order) out["groups"].push_back(Json{{"name", name}, {"projects", groups[name]}});
    SendJson(res, out);
  }));

  http.Get(R"(/api/projects/(\d+))", authed([visible](Request const& req, Response& res, store::User const& u) {
    auto p = visible(PathId(req), u);
    auto j = serialize::ProjectToJson(p);
    j["StatusColor"] = StatusColor(p.status);
    SendJson(res, j);
  }));

  http.Patch(R"(/api/projects/(\d+))", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto p = visible(PathId(req), u);
    if (p.user_id != u.id) throw Error(ErrorCode::kForbidden, "only the owner can edit a project");
    p = ApplyMetadata(p, ParseBody(req));
    store_->UpdateProject(p);
    SendJson(res, serialize::ProjectToJson(store_->GetProject(p.id)));
  }));

  http.Get(R"(/api/projects/(\d+)/cycles)", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto p = visible(PathId(req), u);
    SendJson(res, store::CyclesTable(store_->GetCycles(p.id), p.id));
  }));

  http.Get(R"(/api/projects/(\d+)/rollup)", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto p = visible(PathId(req), u);
    SendJson(res, serialize::RollupToJson(store_->GetDataset(p.id).rollup));
  }));

  http.Get(R"(/api/projects/(\d+)/versions)", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto p = visible(PathId(req), u);
    Json out = Json::array();
    for (auto const& v : store_->FileVersions(p.id)) {
      out.push_back(Json{{"version", v.version},
                         {"stored_at", text::FormatTimestamp(v.stored_at)},
                         {"digest", v.digest},
                         {"size", v.size}});
    }
    SendJson(res, out);
  }));

  http.Post(R"(/api/projects/(\d+)/tags)", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto p = visible(PathId(req), u);
    auto body = ParseBody(req);
    auto const& name = RequireString(body, "name");
    auto value = Field<std::string>(body, "value").value_or("");
    store_->SetTag(p.id, name, value);
    SendJson(res, store::TagsTable(store_->Tags(p.id)));
  }));

  http.Post(R"(/api/projects/(\d+)/organization)",
            authed([this, visible](Request const& req, Response& res, store::User const& u) {
              auto p = visible(PathId(req), u);
              auto body = ParseBody(req);
              if (!body.contains("org_id")) throw Error(ErrorCode::kValidationError, "'org_id' is required");
              store_->AssignOrganization(p.id, Field<std::int64_t>(body, "org_id"), u.id);
              SendJson(res, serialize::ProjectToJson(store_->GetProject(p.id)));
            }));

  http.Post("/api/organizations", authed([this](Request const& req, Response& res, store::User const& u) {
    auto body = ParseBody(req);
    auto org = store_->AddOrganization(RequireString(body, "name"));
    store_->AddMember(org.id, u.id);
    SendJson(res, Json{{"Id", org.id}, {"Name", org.name}}, 201);
  }));

  http.Post(R"(/api/organizations/(\d+)/members)",
            authed([this](Request const& req, Response& res, store::User const& u) {
              auto org = PathId(req);
              if (std::find(u.organizations.begin(), u.organizations.end(), org) == u.organizations.end()) {
                throw Error(ErrorCode::kForbidden, "caller is not a member of organization " + std::to_string(org));
              }
              auto user_id = Field<std::int64_t>(ParseBody(req), "user_id");
              if (!user_id) throw Error(ErrorCode::kValidationError, "'user_id' is required");
              store_->AddMember(org, *user_id);
              SendJson(res, Json{{"organization_id", org}, {"user_id", *user_id}});
            }));

  http.Post("/api/query", authed([this](Request const& req, Response& res, store::User const& u) {
    auto body = ParseBody(req);
    store::Query q;
    q.filename_like = Field<std::string>(body, "filename_like");
    q.project_ids = Field<std::vector<std::int64_t>>(body, "project_ids");
    q.include_cycles = Field<bool>(body, "include_cycles").value_or(false);
    q.include_datapoints = Field<bool>(body, "include_datapoints").value_or(false);
    q.include_tags = Field<bool>(body, "include_tags").value_or(false);
    auto offset = Field<std::int64_t>(body, "offset").value_or(0);
    if (offset < 0) throw Error(ErrorCode::kInvalidArgument, "bad offset");
    q.offset = static_cast<std::size_t>(offset);
    if (auto limit = Field<std::int64_t>(body, "limit")) {
      if (*limit < 0) throw Error(ErrorCode::kInvalidArgument, "bad limit");
      q.limit = static_cast<std::size_t>(*limit);
    }
    q.caller = u.id;
    Json results = Json::array();
    for (auto const& row : store_->RunQuery(q)) results.push_back(store::QueryRowToJson(row));
    SendJson(res, Json{{"results", std::move(results)}});
  }));

  http.Get("/api/variables", authed([](Request const&, Response& res, store::User const&) {
    Json out = Json::array();
    for (auto const& v : analysis::VariableCatalog()) {
      out.push_back(Json{{"id", v.id},
                         {"label", v.label},
                         {"unit", v.unit},
                         {"domain", v.domain == analysis::VariableDomain::kCycle ? "cycle" : "point"}});
    }
    SendJson(res, out);
  }));

  http.Get("/api/profiles", authed([this](Request const&, Response& res, store::User const&) {
    Json out = Json::array();
    auto snap = profiles_->Snapshot();
    for (auto const& id : snap->Ids()) {
      out.push_back(Json{{"format_id", id}, {"description", snap->Find(id)->description}});
    }
    SendJson(res, out);
  }));

  http.Post("/api/plot-data", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto body = ParseBody(req);
    auto ids = Field<std::vector<std::int64_t>>(body, "project_ids").value_or(std::vector<std::int64_t>{});
    if (ids.empty()) throw Error(ErrorCode::kEmptySelection, "project_ids is empty");
    Json defaults = Json::object();
    std::optional<store::PlotTemplate> tmpl;
    if (auto tid = Field<std::int64_t>(body, "template_id")) {
      tmpl = store_->GetTemplate(*tid);
      if (tmpl->user_id != u.id) throw Error(ErrorCode::kNotFound, "template " + std::to_string(*tid));
      defaults = tmpl->formatting;
    }
    auto pick = [&](char const* key, char const* fallback) -> std::optional<std::string> {
      if (auto v = Field<std::string>(body, key)) return v;
      if (auto v = Field<std::string>(defaults, key)) return v;
      if (fallback) return std::string(fallback);
      return std::nullopt;
    };
    analysis::PlotOptions opts;
    if (auto m = Field<std::int64_t>(body, "max_points")) {
      if (*m < 4) throw Error(ErrorCode::kInvalidArgument, "max_points must be >= 4");
      opts.max_points = static_cast<std::size_t>(*m);
    }

    std::vector<ProjectRecord> projects;
    for (auto id : ids) projects.push_back(visible(id, u));

    if (tmpl && tmpl->kind != "cycle-stats") {
      auto sel = analysis::SelectorFromJson(tmpl->selector);
      analysis::PlotSeries plot;
      for (auto const& p : projects) {
        auto stored = store_->GetDataset(p.id);
        auto part = PerCycleSeries(tmpl->kind, p.id, stored.dataset, ResolveAgainst(sel, stored.cycles),
                                   tmpl->formatting);
        plot.x_var = part.x_var;
        plot.y1_var = part.y1_var;
        for (auto& s : part.series) plot.series.push_back(std::move(s));
      }
      SendJson(res, analysis::PlotSeriesToJson(plot));
      return;
    }

    auto x = *pick("x", "cycle");
    auto y1 = *pick("y1", "discharge_capacity");
    auto y2 = pick("y2", nullptr);
    auto const& xinfo = analysis::LookupVariable(x);
    std::vector<std::vector<CycleStats>> cycles(projects.size());
    std::vector<CanonicalDataset> datasets(projects.size());
    std::vector<analysis::PlotSource> sources;
    for (std::size_t k = 0; k < projects.size(); ++k) {
      auto const& p = projects[k];
      analysis::PlotSource src;
      src.project_id = p.id;
      src.label = p.name + " (ch " + std::to_string(p.channel) + ")";
      if (xinfo.domain == analysis::VariableDomain::kCycle) {
        cycles[k] = store_->GetCycles(p.id);
        if (tmpl) {
          auto keep = ResolveAgainst(analysis::SelectorFromJson(tmpl->selector), cycles[k]);
          std::erase_if(cycles[k], [&](CycleStats const& c) {
            return !std::binary_search(keep.begin(), keep.end(), c.cycle_index);
          });
        }
        src.cycles = &cycles[k];
      } else {
        datasets[k] = store_->GetDataset(p.id).dataset;
        src.dataset = &datasets[k];
      }
      sources.push_back(std::move(src));
    }
    auto plot = analysis::BuildPlotSeries(sources, x, y1,
                                          y2 ? std::optional<std::string_view>(*y2) : std::nullopt, opts);
    SendJson(res, analysis::PlotSeriesToJson(plot));
  }));

  http.Post("/api/templates", authed([this](Request const& req, Response& res, store::User const& u) {
    auto body = ParseBody(req);
    store::PlotTemplate t;
    t.user_id = u.id;
    t.name = RequireString(body, "name");
    t.kind = Field<std::string>(body, "kind").value_or("voltage-profile");
    if (std::find(std::begin(kTemplateKinds), std::end(kTemplateKinds), t.kind) == std::end(kTemplateKinds)) {
      throw Error(ErrorCode::kInvalidSelector, "unknown template kind '" + t.kind + "'");
    }
    if (!body.contains("selector")) throw Error(ErrorCode::kInvalidSelector, "'selector' is required");
    t.selector = analysis::SelectorToJson(analysis::SelectorFromJson(body["selector"]));
    t.formatting = body.value("formatting", Json::object());
    if (!t.formatting.is_object()) throw Error(ErrorCode::kInvalidArgument, "formatting must be an object");
    if (t.kind == "cycle-stats") {
      for (auto const* key : {"x", "y1", "y2"}) {
        if (auto v = Field<std::string>(t.formatting, key)) analysis::LookupVariable(*v);
      }
    } else if (t.formatting.contains("direction")) {
      analysis::ParseDirection(t.formatting.value("direction", ""));
    }
    SendJson(res, store::TemplateToJson(store_->SaveTemplate(std::move(t))), 201);
  }));

  http.Get("/api/templates", authed([this](Request const&, Response& res, store::User const& u) {
    Json out = Json::array();
    for (auto const& t : store_->Templates(u.id)) out.push_back(store::TemplateToJson(t));
    SendJson(res, out);
  }));

  http.Get(R"(/api/templates/(\d+)/apply)", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto t = store_->GetTemplate(PathId(req));
    if (t.user_id != u.id) throw Error(ErrorCode::kNotFound, "template " + std::to_string(t.id));
    if (!req.has_param("project_id")) throw Error(ErrorCode::kValidationError, "'project_id' is required");
    auto pid = text::ParseInt(req.get_param_value("project_id"));
    if (!pid) throw Error(ErrorCode::kInvalidArgument, "bad project_id");
    auto p = visible(*pid, u);
    auto stored = store_->GetDataset(p.id);
    auto cycles = ResolveAgainst(analysis::SelectorFromJson(t.selector), stored.cycles);

    analysis::PlotSeries plot;
    if (t.kind == "cycle-stats") {
      std::vector<CycleStats> kept;
      for (auto const& c : stored.cycles) {
        if (std::binary_search(cycles.begin(), cycles.end(), c.cycle_index)) kept.push_back(c);
      }
      analysis::PlotSource src{p.id, p.name + " (ch " + std::to_string(p.channel) + ")", &kept, nullptr};
      auto y2 = Field<std::string>(t.formatting, "y2");
      plot = analysis::BuildPlotSeries({src}, t.formatting.value("x", std::string("cycle")),
                                       t.formatting.value("y1", std::string("discharge_capacity")),
                                       y2 ? std::optional<std::string_view>(*y2) : std::nullopt);
    } else {
      plot = PerCycleSeries(t.kind, p.id, stored.dataset, cycles, t.formatting);
    }
    Json out;
    out["template_id"] = t.id;
    out["name"] = t.name;
    out["kind"] = t.kind;
    out["project_id"] = p.id;
    out["selector"] = t.selector;
    out["cycles"] = cycles;
    out["formatting"] = t.formatting;
    out["plot"] = analysis::PlotSeriesToJson(plot);
    SendJson(res, out);
  }));

  http.Post("/api/dqdv", authed([this, visible](Request const& req, Response& res, store::User const& u) {
    auto body = ParseBody(req);
    auto pid = Field<std::int64_t>(body, "project_id");
    auto cycle = Field<std::int64_t>(body, "cycle");
    if (!pid || !cycle) throw Error(ErrorCode::kValidationError, "'project_id' and 'cycle' are required");
    auto p = visible(*pid, u);
    analysis::DqdvOptions opts;
    opts.dv = Field<double>(body, "dv").value_or(analysis::kDefaultBinWidth);
    opts.smooth_window = Field<int>(body, "smooth_window").value_or(0);
    auto dir = analysis::ParseDirection(Field<std::string>(body, "direction").value_or("discharge"));
    auto curve = analysis::Dqdv(store_->GetDataset(p.id).dataset, *cycle, dir, opts);
    Json peaks = Json::array();
    for (auto const& pk : analysis::FindPeaks(curve, Field<double>(body, "min_prominence"))) {
      peaks.push_back(Json{{"position", pk.position},
                           {"intensity", pk.intensity},
                           {"prominence", pk.prominence},
                           {"area", pk.area}});
    }
    Json out;
    out["project_id"] = p.id;
    out["cycle_index"] = curve.cycle_index;
    out["direction"] = analysis::DirectionName(curve.direction);
    out["dv"] = curve.dv;
    out["smoothing"] = curve.smoothing;
    out["voltage"] = curve.voltage_bins;
    out["dqdv"] = curve.dqdv;
    out["peaks"] = std::move(peaks);
    SendJson(res, out);
  }));
}

}  // namespace cyclebench::service
