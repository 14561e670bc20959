#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <shared_mutex>

#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/digest.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"
#include "cyclebench/store/store.hpp"

namespace cyclebench::store {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::vector<Json> ReadJsonl(fs::path const& p) {
  std::vector<Json> out;
  if (!fs::exists(p)) return out;
  auto text = serialize::ReadFile(p);
  for (auto const& line : csv::SplitLines(text)) {
    if (text::Trim(line).empty()) continue;
    out.push_back(Json::parse(line));
  }
  return out;
}

template <class Range, class Fn>
void WriteJsonl(fs::path const& p, Range const& items, Fn to_json) {
  std::string out;
  for (auto const& item : items) {
    out += to_json(item).dump();
    out += '\n';
  }
  serialize::WriteFileAtomic(p, out);
}

std::string VersionFileName(std::int64_t version) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%03lld.bin", static_cast<long long>(version));
  return buf;
}

Json VersionToJson(FileVersion const& v) {
  return Json{{"ProjectId", v.project_id},
              {"Version", v.version},
              {"StoredAt", text::FormatTimestamp(v.stored_at)},
              {"Digest", v.digest},
              {"Size", v.size}};
}

FileVersion VersionFromJson(Json const& j) {
  FileVersion v;
  v.project_id = j.at("ProjectId").get<std::int64_t>();
  v.version = j.at("Version").get<std::int64_t>();
  auto ts = text::ParseTimestamp(j.at("StoredAt").get<std::string>());
  if (!ts) throw Error(ErrorCode::kIoError, "bad StoredAt in file_versions.jsonl");
  v.stored_at = *ts;
  v.digest = j.at("Digest").get<std::string>();
  v.size = j.at("Size").get<std::int64_t>();
  return v;
}

Json OrgToJson(Organization const& o) { return Json{{"Id", o.id}, {"Name", o.name}}; }

Organization OrgFromJson(Json const& j) {
  return {j.at("Id").get<std::int64_t>(), j.at("Name").get<std::string>()};
}

std::string RandomKey() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device rd;
  std::string out;
  for (int i = 0; i < 40; ++i) out.push_back(kHex[rd() & 0xF]);
  return out;
}

template <class Map>
std::int64_t NextId(Map const& m) {
  return m.empty() ? 1 : m.rbegin()->first + 1;
}

std::optional<std::int64_t> ParseId(std::string const& name) {
  if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) {
        return c >= '0' && c <= '9';
      })) {
    return std::nullopt;
  }
  return text::ParseInt(name);
}

class FileStore final : public Store {
 public:
  FileStore(fs::path root, FileStoreOptions opts) : root_(std::move(root)), opts_(std::move(opts)) {
    if (opts_.shard_count < 1) throw Error(ErrorCode::kInvalidArgument, "shard count must be >= 1");
    if (!opts_.clock) opts_.clock = SystemNow;
    std::error_code ec;
    fs::create_directories(master(), ec);
    fs::create_directories(root_ / "shards", ec);
    fs::create_directories(root_ / "files", ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create store at " + root_.string());
    Load();
    Recover();
  }

  std::int64_t CreateProject(ProjectRecord draft) override {
    if (text::Trim(draft.name).empty()) {
      throw Error(ErrorCode::kValidationError, "project name is required");
    }
    std::unique_lock lock(meta_mu_);
    draft.id = NextId(projects_);
    draft.shard_id = AssignShard(draft.id, shard_count_);
    draft.status = ProjectStatus::kPending;
    draft.num_cycles = 0;
    auto now = opts_.clock();
    if (!draft.created_at) draft.created_at = now;
    draft.updated_at = now;
    projects_[draft.id] = draft;
    SaveProjects();
    return draft.id;
  }

  ProjectRecord GetProject(std::int64_t id) const override {
    std::shared_lock lock(meta_mu_);
    return ProjectLocked(id);
  }

  std::vector<ProjectRecord> ListProjects() const override {
    std::shared_lock lock(meta_mu_);
    std::vector<ProjectRecord> out;
    for (auto const& [id, p] : projects_) out.push_back(p);
    return out;
  }

  void UpdateProject(ProjectRecord const& p) override {
    std::unique_lock lock(meta_mu_);
    auto& cur = ProjectLocked(p.id);
    if (text::Trim(p.name).empty()) {
      throw Error(ErrorCode::kValidationError, "project name is required");
    }
    ProjectRecord next = p;
    next.shard_id = cur.shard_id;
    next.created_at = cur.created_at;
    next.updated_at = opts_.clock();
    cur = std::move(next);
    SaveProjects();
  }

  void PutDataset(std::int64_t project_id, CanonicalDataset const& d,
                  std::vector<CycleStats> const& cycles, StatisticRollup const& rollup) override {
    std::int64_t shard = GetProject(project_id).shard_id;
    auto guard = ProjectMutex(project_id);
    std::unique_lock plock(*guard);
    fs::path const shard_dir = ShardDir(shard);
    fs::path const final_dir = shard_dir / std::to_string(project_id);
    fs::path const tmp_dir =
        shard_dir / (".tmp-" + std::to_string(project_id) + "-" + std::to_string(++tmp_counter_));
    fs::path const old_dir = shard_dir / (".old-" + std::to_string(project_id));
    try {
      fs::create_directories(tmp_dir);
      serialize::WriteFileAtomic(tmp_dir / "meta.json", serialize::MetaToJson(d).dump(2) + "\n");
      serialize::WriteFileAtomic(tmp_dir / "points.csv", serialize::PointsToCsv(d.points));
      serialize::WriteFileAtomic(tmp_dir / "extra.csv", serialize::ExtraToCsv(d.extra));
      Json rows = Json::array();
      for (auto const& c : cycles) rows.push_back(serialize::StoredCycleRow(c, project_id));
      serialize::WriteFileAtomic(tmp_dir / "cycles.json", rows.dump(1) + "\n");
      serialize::WriteFileAtomic(tmp_dir / "rollup.json",
                                 serialize::RollupToJson(rollup).dump(2) + "\n");
      if (fs::exists(final_dir)) fs::rename(final_dir, old_dir);
      fs::rename(tmp_dir, final_dir);
      fs::remove_all(old_dir);
    } catch (std::exception const& e) {
      std::error_code ec;
      fs::remove_all(tmp_dir, ec);
      if (!fs::exists(final_dir, ec) && fs::exists(old_dir, ec)) fs::rename(old_dir, final_dir, ec);
      throw Error(ErrorCode::kShardUnavailable,
                  "shard " + std::to_string(shard) + ": " + e.what());
    }

    std::unique_lock lock(meta_mu_);
    auto& p = ProjectLocked(project_id);
    auto now = opts_.clock();
    p.num_cycles = static_cast<std::int64_t>(cycles.size());
    p.status = ProjectStatus::kReady;
    p.error.clear();
    p.error_detailed.clear();
    p.process_date = now;
    p.updated_at = now;
    SaveProjects();
  }

  StoredDataset GetDataset(std::int64_t project_id) const override {
    auto dir = DatasetDir(project_id);
    auto guard = ProjectMutex(project_id);
    std::shared_lock plock(*guard);
    if (!fs::exists(dir)) {
      throw Error(ErrorCode::kNotFound, "project " + std::to_string(project_id) + " has no data");
    }
    StoredDataset out;
    serialize::MetaFromJson(Json::parse(serialize::ReadFile(dir / "meta.json")), out.dataset);
    out.dataset.points = serialize::PointsFromCsv(serialize::ReadFile(dir / "points.csv"));
    out.dataset.extra = serialize::ExtraFromCsv(serialize::ReadFile(dir / "extra.csv"));
    out.cycles = ReadCycles(dir);
    out.rollup = serialize::RollupFromJson(Json::parse(serialize::ReadFile(dir / "rollup.json")));
    return out;
  }

  std::vector<CycleStats> GetCycles(std::int64_t project_id) const override {
    auto dir = DatasetDir(project_id);
    auto guard = ProjectMutex(project_id);
    std::shared_lock plock(*guard);
    if (!fs::exists(dir)) {
      throw Error(ErrorCode::kNotFound, "project " + std::to_string(project_id) + " has no data");
    }
    return ReadCycles(dir);
  }

  bool HasDataset(std::int64_t project_id) const override {
    auto dir = DatasetDir(project_id);
    auto guard = ProjectMutex(project_id);
    std::shared_lock plock(*guard);
    return fs::exists(dir / "cycles.json");
  }

  std::vector<QueryRow> RunQuery(Query const& q) const override {
    std::vector<ProjectRecord> matches;
    std::map<std::int64_t, std::vector<ProjectTag>> tags;
    {
      std::shared_lock lock(meta_mu_);
      std::optional<User> caller;
      if (q.caller) {
        auto it = users_.find(*q.caller);
        if (it == users_.end()) return {};
        caller = it->second;
      }
      std::set<std::int64_t> wanted;
      if (q.project_ids) wanted.insert(q.project_ids->begin(), q.project_ids->end());
      for (auto const& [id, p] : projects_) {
        if (caller && !CanSee(p, *caller)) continue;
        if (q.project_ids && !wanted.count(id)) continue;
        if (q.filename_like && !text::ContainsIgnoreCase(p.file_name, *q.filename_like)) continue;
        matches.push_back(p);
      }
      if (q.include_tags) {
        for (auto const& t : tags_) tags[t.project_id].push_back(t);
      }
    }
    std::size_t const begin = std::min(q.offset, matches.size());
    std::size_t const end =
        q.limit ? std::min(matches.size(), begin + *q.limit) : matches.size();

    std::vector<QueryRow> out;
    for (std::size_t k = begin; k < end; ++k) {
      QueryRow row;
      row.project = matches[k];
      auto const id = row.project.id;
      bool const has_data = HasDataset(id);
      if (q.include_cycles) row.cycles = has_data ? GetCycles(id) : std::vector<CycleStats>{};
      if (q.include_datapoints) {
        row.datapoints = has_data ? GetDataset(id).dataset : CanonicalDataset{};
      }
      if (q.include_tags) row.tags = tags[id];
      out.push_back(std::move(row));
    }
    return out;
  }

  void SetTag(std::int64_t project_id, std::string const& name, std::string const& value) override {
    if (text::Trim(name).empty()) throw Error(ErrorCode::kValidationError, "tag name is required");
    std::unique_lock lock(meta_mu_);
    ProjectLocked(project_id);
    auto it = std::find_if(tags_.begin(), tags_.end(), [&](ProjectTag const& t) {
      return t.project_id == project_id && t.name == name;
    });
    if (it != tags_.end()) {
      it->value = value;
    } else {
      std::int64_t next = 1;
      for (auto const& t : tags_) next = std::max(next, t.id + 1);
      tags_.push_back({next, project_id, name, value});
    }
    WriteJsonl(master() / "tags.jsonl", tags_, serialize::TagToJson);
  }

  std::vector<ProjectTag> Tags(std::int64_t project_id) const override {
    std::shared_lock lock(meta_mu_);
    ProjectLocked(project_id);
    std::vector<ProjectTag> out;
    for (auto const& t : tags_) {
      if (t.project_id == project_id) out.push_back(t);
    }
    return out;
  }

  FileVersion StoreFileVersion(std::int64_t project_id, std::string_view bytes) override {
    std::unique_lock lock(meta_mu_);
    ProjectLocked(project_id);
    auto& list = versions_[project_id];
    FileVersion v;
    v.project_id = project_id;
    v.version = list.empty() ? 1 : list.back().version + 1;
    v.stored_at = opts_.clock();
    v.digest = Sha256Hex(bytes);
    v.size = static_cast<std::int64_t>(bytes.size());
    auto dir = root_ / "files" / std::to_string(project_id);
    fs::create_directories(dir);
    serialize::WriteFileAtomic(dir / VersionFileName(v.version), bytes);
    list.push_back(v);
    SaveVersions();
    return v;
  }

  std::vector<FileVersion> FileVersions(std::int64_t project_id) const override {
    std::shared_lock lock(meta_mu_);
    auto it = versions_.find(project_id);
    return it == versions_.end() ? std::vector<FileVersion>{} : it->second;
  }

  std::string ReadFileVersion(std::int64_t project_id, std::int64_t version) const override {
    std::shared_lock lock(meta_mu_);
    auto it = versions_.find(project_id);
    if (it == versions_.end() ||
        std::none_of(it->second.begin(), it->second.end(),
                     [&](FileVersion const& v) { return v.version == version; })) {
      throw Error(ErrorCode::kNotFound, "project " + std::to_string(project_id) + " has no file version " +
                                            std::to_string(version));
    }
    return serialize::ReadFile(root_ / "files" / std::to_string(project_id) / VersionFileName(version));
  }

  std::vector<FileVersion> RetentionSweep(Timestamp now, int period_days) override {
    auto const period = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::hours(24) * period_days);
    std::unique_lock lock(meta_mu_);
    std::vector<FileVersion> deleted;
    for (auto& [pid, list] : versions_) {
      if (list.size() < 2) continue;
      std::vector<FileVersion> kept;
      for (std::size_t k = 0; k < list.size(); ++k) {
        bool const latest = k + 1 == list.size();
        if (!latest && now - list[k].stored_at > period) {
          std::error_code ec;
          fs::remove(root_ / "files" / std::to_string(pid) / VersionFileName(list[k].version), ec);
          deleted.push_back(list[k]);
        } else {
          kept.push_back(list[k]);
        }
      }
      list = std::move(kept);
    }
    if (!deleted.empty()) SaveVersions();
    return deleted;
  }

  User AddUser(std::string const& name, std::optional<std::string> api_key) override {
    if (text::Trim(name).empty()) throw Error(ErrorCode::kValidationError, "user name is required");
    std::unique_lock lock(meta_mu_);
    User u;
    u.id = NextId(users_);
    u.name = name;
    u.api_key = api_key ? *api_key : RandomKey();
    for (auto const& [id, other] : users_) {
      if (other.api_key == u.api_key) throw Error(ErrorCode::kConflict, "API key already in use");
    }
    users_[u.id] = u;
    SaveUsers();
    return u;
  }

  std::optional<User> FindUserByKey(std::string_view api_key) const override {
    std::shared_lock lock(meta_mu_);
    for (auto const& [id, u] : users_) {
      if (!api_key.empty() && u.api_key == api_key) return u;
    }
    return std::nullopt;
  }

  User GetUser(std::int64_t id) const override {
    std::shared_lock lock(meta_mu_);
    auto it = users_.find(id);
    if (it == users_.end()) throw Error(ErrorCode::kNotFound, "user " + std::to_string(id));
    return it->second;
  }

  Organization AddOrganization(std::string const& name) override {
    if (text::Trim(name).empty()) {
      throw Error(ErrorCode::kValidationError, "organization name is required");
    }
    std::unique_lock lock(meta_mu_);
    Organization o{NextId(orgs_), name};
    orgs_[o.id] = o;
    WriteJsonl(master() / "organizations.jsonl", Values(orgs_), OrgToJson);
    return o;
  }

  void AddMember(std::int64_t org_id, std::int64_t user_id) override {
    std::unique_lock lock(meta_mu_);
    if (!orgs_.count(org_id)) throw Error(ErrorCode::kNotFound, "organization " + std::to_string(org_id));
    auto it = users_.find(user_id);
    if (it == users_.end()) throw Error(ErrorCode::kNotFound, "user " + std::to_string(user_id));
    auto& orgs = it->second.organizations;
    if (std::find(orgs.begin(), orgs.end(), org_id) == orgs.end()) {
      orgs.push_back(org_id);
      std::sort(orgs.begin(), orgs.end());
    }
    SaveUsers();
  }

  void AssignOrganization(std::int64_t project_id, std::optional<std::int64_t> org_id,
                          std::int64_t caller) override {
    std::unique_lock lock(meta_mu_);
    auto& p = ProjectLocked(project_id);
    if (p.user_id != caller) {
      throw Error(ErrorCode::kForbidden, "only the owner can share project " + std::to_string(project_id));
    }
    if (org_id) {
      if (!orgs_.count(*org_id)) {
        throw Error(ErrorCode::kNotFound, "organization " + std::to_string(*org_id));
      }
      auto u = users_.find(caller);
      if (u == users_.end() ||
          std::find(u->second.organizations.begin(), u->second.organizations.end(), *org_id) ==
              u->second.organizations.end()) {
        throw Error(ErrorCode::kForbidden,
                    "caller is not a member of organization " + std::to_string(*org_id));
      }
    }
    p.organization_id = org_id;
    p.updated_at = opts_.clock();
    SaveProjects();
  }

  PlotTemplate SaveTemplate(PlotTemplate t) override {
    if (text::Trim(t.name).empty()) {
      throw Error(ErrorCode::kValidationError, "template name is required");
    }
    std::unique_lock lock(meta_mu_);
    t.id = NextId(templates_);
    templates_[t.id] = t;
    WriteJsonl(master() / "templates.jsonl", Values(templates_), TemplateToJson);
    return t;
  }

  PlotTemplate GetTemplate(std::int64_t id) const override {
    std::shared_lock lock(meta_mu_);
    auto it = templates_.find(id);
    if (it == templates_.end()) throw Error(ErrorCode::kNotFound, "template " + std::to_string(id));
    return it->second;
  }

  std::vector<PlotTemplate> Templates(std::int64_t user_id) const override {
    std::shared_lock lock(meta_mu_);
    std::vector<PlotTemplate> out;
    for (auto const& [id, t] : templates_) {
      if (t.user_id == user_id) out.push_back(t);
    }
    return out;
  }

  FsckReport Fsck() const override {
    std::shared_lock lock(meta_mu_);
    FsckReport r;
    auto problem = [&](std::string msg) { r.problems.push_back(std::move(msg)); };

    std::error_code ec;
    for (auto const& shard_entry : fs::directory_iterator(root_ / "shards", ec)) {
      auto shard = ParseId(shard_entry.path().filename().string());
      if (!shard) {
        problem("unexpected entry " + shard_entry.path().string());
        continue;
      }
      for (auto const& e : fs::directory_iterator(shard_entry.path())) {
        auto name = e.path().filename().string();
        auto pid = ParseId(name);
        if (!pid) {
          problem("stray entry " + e.path().string());
          continue;
        }
        auto it = projects_.find(*pid);
        if (it == projects_.end()) {
          problem("shard " + std::to_string(*shard) + " holds data for unknown project " + name);
        } else if (it->second.shard_id != *shard) {
          problem("project " + name + " data found on shard " + std::to_string(*shard) +
                  " but assigned to " + std::to_string(it->second.shard_id));
        }
      }
    }

    for (auto const& [id, p] : projects_) {
      if ((p.status == ProjectStatus::kFailed) != !p.error.empty()) {
        problem("project " + std::to_string(id) + " status/error mismatch");
      }
      if (p.organization_id && !orgs_.count(*p.organization_id)) {
        problem("project " + std::to_string(id) + " references unknown organization");
      }
      auto dir = ShardDir(p.shard_id) / std::to_string(id);
      if (p.status != ProjectStatus::kReady) continue;
      if (!fs::exists(dir / "cycles.json")) {
        problem("ready project " + std::to_string(id) + " has no shard data");
        continue;
      }
      for (auto const* f : {"meta.json", "points.csv", "extra.csv", "rollup.json"}) {
        if (!fs::exists(dir / f)) problem("project " + std::to_string(id) + " missing " + f);
      }
      auto rows = Json::parse(serialize::ReadFile(dir / "cycles.json"));
      if (static_cast<std::int64_t>(rows.size()) != p.num_cycles) {
        problem("project " + std::to_string(id) + " NumCycles " + std::to_string(p.num_cycles) +
                " but " + std::to_string(rows.size()) + " cycle rows");
      }
      for (auto const& row : rows) {
        if (row.at("ProjectId").get<std::int64_t>() != id) {
          problem("project " + std::to_string(id) + " has a cycle row for another project");
          break;
        }
      }
    }

    std::set<std::pair<std::int64_t, std::string>> tag_keys;
    for (auto const& t : tags_) {
      if (!projects_.count(t.project_id)) {
        problem("tag " + std::to_string(t.id) + " references unknown project");
      }
      if (!tag_keys.insert({t.project_id, t.name}).second) {
        problem("duplicate tag '" + t.name + "' on project " + std::to_string(t.project_id));
      }
    }

    for (auto const& [pid, list] : versions_) {
      if (!projects_.count(pid)) problem("file versions for unknown project " + std::to_string(pid));
      for (std::size_t k = 0; k < list.size(); ++k) {
        if (k > 0 && list[k].version <= list[k - 1].version) {
          problem("file versions of project " + std::to_string(pid) + " not increasing");
        }
        auto f = root_ / "files" / std::to_string(pid) / VersionFileName(list[k].version);
        if (!fs::exists(f)) {
          problem("missing " + f.string());
        } else if (static_cast<std::int64_t>(fs::file_size(f)) != list[k].size) {
          problem("size mismatch for " + f.string());
        }
      }
    }
    for (auto const& e : fs::directory_iterator(root_ / "files", ec)) {
      auto pid = ParseId(e.path().filename().string());
      if (!pid) {
        problem("stray entry " + e.path().string());
        continue;
      }
      auto it = versions_.find(*pid);
      for (auto const& f : fs::directory_iterator(e.path())) {
        auto name = f.path().filename().string();
        bool known = it != versions_.end() &&
                     std::any_of(it->second.begin(), it->second.end(), [&](FileVersion const& v) {
                       return VersionFileName(v.version) == name;
                     });
        if (!known) problem("unrecorded file " + f.path().string());
      }
    }
    return r;
  }

  std::int64_t shard_count() const override { return shard_count_; }

 private:
  fs::path master() const { return root_ / "master"; }
  fs::path ShardDir(std::int64_t shard) const { return root_ / "shards" / std::to_string(shard); }

  fs::path DatasetDir(std::int64_t project_id) const {
    return ShardDir(GetProject(project_id).shard_id) / std::to_string(project_id);
  }

  ProjectRecord& ProjectLocked(std::int64_t id) {
    auto it = projects_.find(id);
    if (it == projects_.end()) throw Error(ErrorCode::kNotFound, "project " + std::to_string(id));
    return it->second;
  }
  ProjectRecord const& ProjectLocked(std::int64_t id) const {
    return const_cast<FileStore*>(this)->ProjectLocked(id);
  }

  std::shared_ptr<std::shared_mutex> ProjectMutex(std::int64_t id) const {
    std::lock_guard lock(locks_mu_);
    auto& slot = project_locks_[id];
    if (!slot) slot = std::make_shared<std::shared_mutex>();
    return slot;
  }

  static std::vector<CycleStats> ReadCycles(fs::path const& dir) {
    std::vector<CycleStats> out;
    for (auto const& row : Json::parse(serialize::ReadFile(dir / "cycles.json"))) {
      out.push_back(serialize::CycleFromStoredRow(row));
    }
    return out;
  }

  template <class Map>
  static std::vector<typename Map::mapped_type> Values(Map const& m) {
    std::vector<typename Map::mapped_type> out;
    for (auto const& [k, v] : m) out.push_back(v);
    return out;
  }

  void SaveProjects() {
    WriteJsonl(master() / "projects.jsonl", Values(projects_), serialize::ProjectToJson);
  }
  void SaveUsers() { WriteJsonl(master() / "users.jsonl", Values(users_), UserToJson); }
  void SaveVersions() {
    std::vector<FileVersion> all;
    for (auto const& [pid, list] : versions_) all.insert(all.end(), list.begin(), list.end());
    WriteJsonl(master() / "file_versions.jsonl", all, VersionToJson);
  }

  void Load() {
    auto config_path = master() / "config.json";
    Json config = fs::exists(config_path) ? Json::parse(serialize::ReadFile(config_path)) : Json::object();
    // Existing assignments are never recomputed; a new count only affects
    // projects created from now on.
    shard_count_ = opts_.shard_count;
    if (!config.contains("ShardCount") || config["ShardCount"].get<std::int64_t>() != shard_count_) {
      config["ShardCount"] = shard_count_;
      serialize::WriteFileAtomic(config_path, config.dump(2) + "\n");
    }
    for (auto const& j : ReadJsonl(master() / "projects.jsonl")) {
      auto p = serialize::ProjectFromJson(j);
      projects_[p.id] = p;
    }
    for (auto const& j : ReadJsonl(master() / "tags.jsonl")) tags_.push_back(serialize::TagFromJson(j));
    for (auto const& j : ReadJsonl(master() / "users.jsonl")) {
      auto u = UserFromJson(j);
      users_[u.id] = u;
    }
    for (auto const& j : ReadJsonl(master() / "organizations.jsonl")) {
      auto o = OrgFromJson(j);
      orgs_[o.id] = o;
    }
    for (auto const& j : ReadJsonl(master() / "templates.jsonl")) {
      auto t = TemplateFromJson(j);
      templates_[t.id] = t;
    }
    for (auto const& j : ReadJsonl(master() / "file_versions.jsonl")) {
      auto v = VersionFromJson(j);
      versions_[v.project_id].push_back(v);
    }
    for (auto& [pid, list] : versions_) {
      std::sort(list.begin(), list.end(),
                [](FileVersion const& a, FileVersion const& b) { return a.version < b.version; });
    }
  }

  // Finish or roll back dataset swaps interrupted by a crash.
  void Recover() {
    std::error_code ec;
    for (auto const& shard_entry : fs::directory_iterator(root_ / "shards", ec)) {
      std::vector<fs::path> entries;
      for (auto const& e : fs::directory_iterator(shard_entry.path())) entries.push_back(e.path());
      for (auto const& path : entries) {
        auto name = path.filename().string();
        if (name.starts_with(".tmp-")) {
          fs::remove_all(path);
        } else if (name.starts_with(".old-")) {
          auto final_dir = path.parent_path() / name.substr(5);
          if (fs::exists(final_dir)) {
            fs::remove_all(path);
          } else {
            fs::rename(path, final_dir);
          }
        }
      }
    }
  }

  fs::path root_;
  FileStoreOptions opts_;
  std::int64_t shard_count_ = 1;

  mutable std::shared_mutex meta_mu_;
  std::map<std::int64_t, ProjectRecord> projects_;
  std::vector<ProjectTag> tags_;
  std::map<std::int64_t, User> users_;
  std::map<std::int64_t, Organization> orgs_;
  std::map<std::int64_t, PlotTemplate> templates_;
  std::map<std::int64_t, std::vector<FileVersion>> versions_;

  mutable std::mutex locks_mu_;
  mutable std::map<std::int64_t, std::shared_ptr<std::shared_mutex>> project_locks_;
  std::atomic<std::uint64_t> tmp_counter_{0};
};

}  // namespace

std::unique_ptr<Store> OpenFileStore(fs::path const& root, FileStoreOptions const& opts) {
  return std::make_unique<FileStore>(root, opts);
}

}  // namespace cyclebench::store
