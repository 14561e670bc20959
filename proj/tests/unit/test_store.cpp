#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"

#include "synth.hpp"

#include "cyclebench/core/columns.hpp"
#include "cyclebench/core/digest.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"
#include "cyclebench/engine/cycle_stats.hpp"
#include "cyclebench/store/store.hpp"

using namespace cyclebench;
using namespace cyclebench::store;
namespace fs = std::filesystem;
using std::chrono::hours;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(std::string const& name) : path(fs::temp_directory_path() / ("cb_store_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct FakeClock {
  std::shared_ptr<Timestamp> now = std::make_shared<Timestamp>(text::FromUnixSeconds(1700000000));
  Clock fn() const {
    auto n = now;
    return [n] { return *n; };
  }
  void advance_days(int d) { *now += hours(24 * d); }
};

std::int64_t NewProject(Store& s, std::string name, std::int64_t user = 1) {
  ProjectRecord p;
  p.name = name;
  p.file_name = name + ".csv";
  p.user_id = user;
  return s.CreateProject(p);
}

void PutProcessed(Store& s, std::int64_t pid, CanonicalDataset const& d) {
  auto p = engine::ProcessDataset(d);
  s.PutDataset(pid, p.dataset, p.stats, p.rollup);
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (Error const& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("project CRUD and dataset round-trip survive reopen") {
  TempDir dir("crud");
  auto d = testing::MakeD1();
  std::int64_t pid;
  {
    auto s = OpenFileStore(dir.path);
    pid = NewProject(*s, "cell-1");
    auto p = s->GetProject(pid);
    CHECK(p.status == ProjectStatus::kPending);
    CHECK(p.created_at.has_value());
    CHECK_FALSE(s->HasDataset(pid));
    PutProcessed(*s, pid, d);
    p = s->GetProject(pid);
    CHECK(p.status == ProjectStatus::kReady);
    CHECK(p.num_cycles == 1);
    p.comments = "formation";
    p.shard_id = 99;  // ignored
    s->UpdateProject(p);
    CHECK(CodeOf([&] { NewProject(*s, ""); }) == ErrorCode::kValidationError);
    CHECK(CodeOf([&] { s->GetProject(404); }) == ErrorCode::kNotFound);
  }
  auto s = OpenFileStore(dir.path);
  auto p = s->GetProject(pid);
  CHECK(p.comments == "formation");
  CHECK(p.shard_id == 0);
  auto stored = s->GetDataset(pid);
  auto want = engine::ProcessDataset(d);
  CHECK(stored.dataset == want.dataset);
  CHECK(stored.cycles == want.stats);
  CHECK(stored.rollup == want.rollup);
  CHECK(s->Fsck().clean());
}

TEST_CASE("file versions and retention boundary") {
  TempDir dir("retention");
  FakeClock clock;
  auto s = OpenFileStore(dir.path, {1, clock.fn()});
  auto pid = NewProject(*s, "cell");
  auto v1 = s->StoreFileVersion(pid, "first");
  clock.advance_days(1);
  auto v2 = s->StoreFileVersion(pid, "second");
  clock.advance_days(1);
  auto v3 = s->StoreFileVersion(pid, "third");
  CHECK(v1.version == 1);
  CHECK(v3.version == 3);
  CHECK(v1.digest == Sha256Hex("first"));
  CHECK(s->ReadFileVersion(pid, 2) == "second");

  auto t0 = v1.stored_at;
  // v1 is 364 days old: kept.
  CHECK(s->RetentionSweep(t0 + hours(24 * 364)).empty());
  // exactly 365 days: kept (age must exceed the period).
  CHECK(s->RetentionSweep(t0 + hours(24 * 365)).empty());
  // 366 days: v1 goes, v2 (365 days) stays.
  auto gone = s->RetentionSweep(t0 + hours(24 * 366));
  REQUIRE(gone.size() == 1);
  CHECK(gone[0].version == 1);
  CHECK(CodeOf([&] { s->ReadFileVersion(pid, 1); }) == ErrorCode::kNotFound);
  // The latest version is never swept.
  auto later = s->RetentionSweep(t0 + hours(24 * 5000));
  CHECK(later.size() == 1);
  auto left = s->FileVersions(pid);
  REQUIRE(left.size() == 1);
  CHECK(left[0] == v3);
  CHECK(s->Fsck().clean());
  (void)v2;
}

TEST_CASE("query filters, paging and payload columns") {
  TempDir dir("query");
  auto s = OpenFileStore(dir.path);
  std::mt19937_64 rng(4);
  std::vector<std::int64_t> ids;
  for (int k = 0; k < 5; ++k) {
    auto pid = NewProject(*s, "Cell_" + std::to_string(k));
    PutProcessed(*s, pid, testing::RandomCycling(rng, {4, 10}));
    s->SetTag(pid, "chemistry", k % 2 ? "LFP" : "NMC");
    ids.push_back(pid);
  }
  Query q;
  q.filename_like = "cell_3";
  q.include_cycles = true;
  q.include_tags = true;
  auto rows = s->RunQuery(q);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].project.id == ids[3]);
  auto j = QueryRowToJson(rows[0]);
  std::vector<std::string> cols = j["cycles"]["columns"];
  REQUIRE(cols.size() == columns::kCycleColumns.size());
  for (std::size_t k = 0; k < cols.size(); ++k) CHECK(cols[k] == columns::kCycleColumns[k]);
  CHECK(j["cycles"]["rows"].size() == rows[0].cycles->size());
  std::vector<std::string> tag_cols = j["projectTags"]["columns"];
  CHECK(tag_cols == std::vector<std::string>(columns::kProjectTagColumns.begin(), columns::kProjectTagColumns.end()));
  CHECK_FALSE(j.contains("dataPoints"));

  Query page;
  page.offset = 1;
  page.limit = 2;
  auto pr = s->RunQuery(page);
  REQUIRE(pr.size() == 2);
  CHECK(pr[0].project.id == ids[1]);

  Query sel;
  sel.project_ids = std::vector<std::int64_t>{ids[0], ids[4]};
  sel.include_datapoints = true;
  auto sr = s->RunQuery(sel);
  REQUIRE(sr.size() == 2);
  auto dp = DataPointsTable(*sr[0].datapoints, ids[0]);
  std::vector<std::string> dcols = dp["columns"];
  CHECK(dcols.size() == columns::kDataPointColumns.size());

  s->SetTag(ids[0], "chemistry", "LTO");
  auto tags = s->Tags(ids[0]);
  REQUIRE(tags.size() == 1);
  CHECK(tags[0].value == "LTO");
}

TEST_CASE("shard count does not change query results") {
  TempDir one("shard1"), four("shard4");
  FakeClock clock;
  auto a = OpenFileStore(one.path, {1, clock.fn()});
  auto b = OpenFileStore(four.path, {4, clock.fn()});
  std::mt19937_64 rng(8);
  std::set<std::int64_t> shards;
  for (int k = 0; k < 12; ++k) {
    auto d = testing::RandomCycling(rng, {3, 8});
    auto pa = NewProject(*a, "p" + std::to_string(k));
    auto pb = NewProject(*b, "p" + std::to_string(k));
    REQUIRE(pa == pb);
    PutProcessed(*a, pa, d);
    PutProcessed(*b, pb, d);
    shards.insert(b->GetProject(pb).shard_id);
    CHECK(b->GetProject(pb).shard_id == AssignShard(pb, 4));
  }
  CHECK(shards.size() > 1);
  Query q;
  q.include_cycles = q.include_datapoints = q.include_tags = true;
  auto ra = a->RunQuery(q), rb = b->RunQuery(q);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t k = 0; k < ra.size(); ++k) {
    auto ja = QueryRowToJson(ra[k]), jb = QueryRowToJson(rb[k]);
    ja["project"].erase("Shard_Id");
    jb["project"].erase("Shard_Id");
    CHECK(ja == jb);
  }
  CHECK(a->Fsck().clean());
  CHECK(b->Fsck().clean());
}

TEST_CASE("fsck notices damage") {
  TempDir dir("fsck");
  auto s = OpenFileStore(dir.path, {2});
  auto pid = NewProject(*s, "x");
  PutProcessed(*s, pid, testing::MakeD1());
  s->StoreFileVersion(pid, "bytes");
  REQUIRE(s->Fsck().clean());
  auto shard = s->GetProject(pid).shard_id;
  fs::remove(dir.path / "shards" / std::to_string(shard) / std::to_string(pid) / "rollup.json");
  fs::create_directories(dir.path / "shards" / std::to_string(shard) / "777");
  auto report = s->Fsck();
  CHECK(report.problems.size() >= 2);
}

TEST_CASE("interrupted dataset swap is rolled back on open") {
  TempDir dir("crash");
  std::int64_t pid;
  {
    auto s = OpenFileStore(dir.path);
    pid = NewProject(*s, "x");
    PutProcessed(*s, pid, testing::MakeD1());
  }
  auto shard_dir = dir.path / "shards" / "0";
  // A half-written replacement and a swap caught between its two renames.
  fs::create_directories(shard_dir / (".tmp-" + std::to_string(pid) + "-9"));
  fs::rename(shard_dir / std::to_string(pid), shard_dir / (".old-" + std::to_string(pid)));
  auto s = OpenFileStore(dir.path);
  CHECK(s->HasDataset(pid));
  CHECK(s->GetCycles(pid).size() == 1);
  CHECK(s->Fsck().clean());
  CHECK_FALSE(fs::exists(shard_dir / (".tmp-" + std::to_string(pid) + "-9")));
}

TEST_CASE("organizations and visibility") {
  TempDir dir("orgs");
  auto s = OpenFileStore(dir.path);
  auto alice = s->AddUser("alice", std::string("key-a"));
  auto bob = s->AddUser("bob", std::string("key-b"));
  auto carol = s->AddUser("carol");
  CHECK(carol.api_key.size() >= 32);
  CHECK(CodeOf([&] { s->AddUser("dup", std::string("key-a")); }) == ErrorCode::kConflict);
  CHECK(s->FindUserByKey("key-b")->id == bob.id);
  CHECK_FALSE(s->FindUserByKey("nope"));

  auto org = s->AddOrganization("lab");
  s->AddMember(org.id, alice.id);
  s->AddMember(org.id, bob.id);
  auto pid = NewProject(*s, "shared", alice.id);
  PutProcessed(*s, pid, testing::MakeD1());

  Query q;
  q.caller = bob.id;
  CHECK(s->RunQuery(q).empty());
  CHECK(CodeOf([&] { s->AssignOrganization(pid, org.id, bob.id); }) == ErrorCode::kForbidden);
  CHECK(CodeOf([&] { s->AssignOrganization(pid, 999, alice.id); }) == ErrorCode::kNotFound);
  s->AssignOrganization(pid, org.id, alice.id);
  CHECK(s->RunQuery(q).size() == 1);
  CHECK(CanSee(s->GetProject(pid), s->GetUser(bob.id)));
  CHECK_FALSE(CanSee(s->GetProject(pid), s->GetUser(carol.id)));
  s->AssignOrganization(pid, std::nullopt, alice.id);
  CHECK(s->RunQuery(q).empty());

  auto back = UserFromJson(UserToJson(s->GetUser(alice.id)));
  CHECK(back.organizations == std::vector<std::int64_t>{org.id});
}

TEST_CASE("templates persist per user") {
  TempDir dir("templates");
  std::int64_t id;
  {
    auto s = OpenFileStore(dir.path);
    PlotTemplate t;
    t.user_id = 3;
    t.name = "fade";
    t.kind = "cycle-stats";
    t.selector = {{"mode", "interval"}, {"start", 6}, {"step", 52}};
    t.formatting = {{"y1", "discharge_capacity"}};
    id = s->SaveTemplate(t).id;
    CHECK(CodeOf([&] { s->SaveTemplate(PlotTemplate{}); }) == ErrorCode::kValidationError);
  }
  auto s = OpenFileStore(dir.path);
  auto t = s->GetTemplate(id);
  CHECK(t.name == "fade");
  CHECK(t.selector["step"] == 52);
  CHECK(s->Templates(3).size() == 1);
  CHECK(s->Templates(4).empty());
  CHECK(TemplateToJson(TemplateFromJson(TemplateToJson(t))) == TemplateToJson(t));
}

TEST_CASE("helpers") {
  CHECK(FormatFileSize(512) == "512 B");
  CHECK(FormatFileSize(8766095) == "8.36 MB");
  for (std::int64_t id = 1; id < 200; ++id) {
    auto s = AssignShard(id, 4);
    CHECK(s >= 0);
    CHECK(s < 4);
    CHECK(AssignShard(id, 1) == 0);
  }
}
