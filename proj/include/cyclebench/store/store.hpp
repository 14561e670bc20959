#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cyclebench/core/model.hpp"

namespace cyclebench::store {

using Clock = std::function<Timestamp()>;
Timestamp SystemNow();

inline constexpr int kDefaultRetentionDays = 365;

struct FileVersion {
  std::int64_t project_id = 0;
  std::int64_t version = 0;  // 1-based, strictly increasing per project
  Timestamp stored_at{};
  std::string digest;        // SHA-256 hex
  std::int64_t size = 0;

  friend bool operator==(FileVersion const&, FileVersion const&) = default;
};

struct StoredDataset {
  CanonicalDataset dataset;
  std::vector<CycleStats> cycles;
  StatisticRollup rollup;
};

struct User {
  std::int64_t id = 0;
  std::string name;
  std::string api_key;
  std::vector<std::int64_t> organizations;
};

struct Organization {
  std::int64_t id = 0;
  std::string name;
};

// Saved plot recipe. Selector and formatting are kept as JSON; the service
// validates them.
struct PlotTemplate {
  std::int64_t id = 0;
  std::int64_t user_id = 0;
  std::string name;
  std::string kind;
  nlohmann::ordered_json selector;
  nlohmann::ordered_json formatting;
};

struct Query {
  std::optional<std::string> filename_like;  // case-insensitive substring of file_name
  std::optional<std::vector<std::int64_t>> project_ids;
  bool include_cycles = false;
  bool include_datapoints = false;
  bool include_tags = false;
  std::size_t offset = 0;
  std::optional<std::size_t> limit;
  // Restrict to projects this user may see; unset means unrestricted.
  std::optional<std::int64_t> caller;
};

struct QueryRow {
  ProjectRecord project;
  std::optional<std::vector<CycleStats>> cycles;
  std::optional<CanonicalDataset> datapoints;
  std::optional<std::vector<ProjectTag>> tags;
};

struct FsckReport {
  std::vector<std::string> problems;
  bool clean() const { return problems.empty(); }
};

// Owner, or member of the project's organization.
bool CanSee(ProjectRecord const& p, User const& u);

// Human-readable size with binary prefixes, e.g. "8.36 MB".
std::string FormatFileSize(std::int64_t bytes);

// Shard for a project id under a given shard count (FNV-1a of the decimal id).
std::int64_t AssignShard(std::int64_t project_id, std::int64_t shard_count);

// Persistence interface. Every method is safe to call concurrently.
class Store {
 public:
  virtual ~Store() = default;

  // Persists with status Pending and a shard assigned. Throws ValidationError
  // for an empty name.
  virtual std::int64_t CreateProject(ProjectRecord draft) = 0;
  virtual ProjectRecord GetProject(std::int64_t id) const = 0;
  virtual std::vector<ProjectRecord> ListProjects() const = 0;
  // Replaces the metadata row; id, shard_id and created_at are preserved.
  virtual void UpdateProject(ProjectRecord const& p) = 0;

  // All-or-nothing per project. Sets num_cycles and status Ready.
  virtual void PutDataset(std::int64_t project_id, CanonicalDataset const& d,
                          std::vector<CycleStats> const& cycles,
                          StatisticRollup const& rollup) = 0;
  virtual StoredDataset GetDataset(std::int64_t project_id) const = 0;
  virtual std::vector<CycleStats> GetCycles(std::int64_t project_id) const = 0;
  virtual bool HasDataset(std::int64_t project_id) const = 0;

  virtual std::vector<QueryRow> RunQuery(Query const& q) const = 0;

  virtual void SetTag(std::int64_t project_id, std::string const& name,
                      std::string const& value) = 0;
  virtual std::vector<ProjectTag> Tags(std::int64_t project_id) const = 0;

  virtual FileVersion StoreFileVersion(std::int64_t project_id, std::string_view bytes) = 0;
  virtual std::vector<FileVersion> FileVersions(std::int64_t project_id) const = 0;
  virtual std::string ReadFileVersion(std::int64_t project_id, std::int64_t version) const = 0;
  // Deletes non-latest versions whose age exceeds period_days strictly.
  virtual std::vector<FileVersion> RetentionSweep(Timestamp now,
                                                  int period_days = kDefaultRetentionDays) = 0;

  virtual User AddUser(std::string const& name, std::optional<std::string> api_key = {}) = 0;
  virtual std::optional<User> FindUserByKey(std::string_view api_key) const = 0;
  virtual User GetUser(std::int64_t id) const = 0;
  virtual Organization AddOrganization(std::string const& name) = 0;
  virtual void AddMember(std::int64_t org_id, std::int64_t user_id) = 0;
  // Owner only, into an organization the owner belongs to; nullopt unassigns.
  // Throws Forbidden.
  virtual void AssignOrganization(std::int64_t project_id, std::optional<std::int64_t> org_id,
                                  std::int64_t caller) = 0;

  virtual PlotTemplate SaveTemplate(PlotTemplate t) = 0;
  virtual PlotTemplate GetTemplate(std::int64_t id) const = 0;
  virtual std::vector<PlotTemplate> Templates(std::int64_t user_id) const = 0;

  virtual FsckReport Fsck() const = 0;
  virtual std::int64_t shard_count() const = 0;
};

struct FileStoreOptions {
  std::int64_t shard_count = 1;
  Clock clock = SystemNow;
};

// Single-node reference backend. Layout:
//   master/{config.json, projects.jsonl, tags.jsonl, users.jsonl,
//           organizations.jsonl, templates.jsonl, file_versions.jsonl}
//   shards/<k>/<project_id>/{meta.json, points.csv, extra.csv, cycles.json, rollup.json}
//   files/<project_id>/v<NNN>.bin
std::unique_ptr<Store> OpenFileStore(std::filesystem::path const& root,
                                     FileStoreOptions const& opts = {});

// Query payload: {"project": {...}, "cycles": table, "dataPoints": table,
// "projectTags": table}; a table is {"columns": [...], "rows": [[...]]}.
nlohmann::ordered_json QueryRowToJson(QueryRow const& r);
nlohmann::ordered_json CyclesTable(std::vector<CycleStats> const& cycles, std::int64_t project_id);
nlohmann::ordered_json DataPointsTable(CanonicalDataset const& d, std::int64_t project_id);
nlohmann::ordered_json TagsTable(std::vector<ProjectTag> const& tags);

nlohmann::ordered_json UserToJson(User const& u);
User UserFromJson(nlohmann::ordered_json const& j);
nlohmann::ordered_json TemplateToJson(PlotTemplate const& t);
PlotTemplate TemplateFromJson(nlohmann::ordered_json const& j);

}  // namespace cyclebench::store
