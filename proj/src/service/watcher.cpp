#include "cyclebench/service/watcher.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <thread>

#include <spdlog/spdlog.h>

#include "cyclebench/core/digest.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"

namespace cyclebench::service {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Ledger Ledger::Load(fs::path const& file) {
  Ledger l;
  if (!fs::exists(file)) return l;
  Json j;
  try {
    j = Json::parse(serialize::ReadFile(file));
  } catch (Json::exception const& e) {
    throw Error(ErrorCode::kIoError, "corrupt ledger " + file.string() + ": " + e.what());
  }
  for (auto const& row : j.at("files")) {
    LedgerEntry e;
    e.path = row.at("path").get<std::string>();
    e.size = row.at("size").get<std::int64_t>();
    e.mtime_ns = row.at("mtime_ns").get<std::int64_t>();
    e.digest = row.at("digest").get<std::string>();
    e.project_id = row.at("project_id").get<std::int64_t>();
    l.entries_[e.path] = e;
  }
  return l;
}

void Ledger::Save(fs::path const& file) const {
  Json rows = Json::array();
  for (auto const& [_, e] : entries_) {
    rows.push_back(Json{{"path", e.path},
                        {"size", e.size},
                        {"mtime_ns", e.mtime_ns},
                        {"digest", e.digest},
                        {"project_id", e.project_id}});
  }
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  serialize::WriteFileAtomic(file, Json{{"files", rows}}.dump(1) + "\n");
}

LedgerEntry const* Ledger::Find(std::string const& path) const {
  auto it = entries_.find(path);
  return it == entries_.end() ? nullptr : &it->second;
}

void Ledger::Put(LedgerEntry e) { entries_[e.path] = std::move(e); }

std::vector<LedgerEntry> Ledger::entries() const {
  std::vector<LedgerEntry> out;
  for (auto const& [_, e] : entries_) out.push_back(e);
  return out;
}

Watcher::Watcher(WatchConfig cfg, Clock clock)
    : cfg_(std::move(cfg)),
      clock_(std::move(clock)),
      schedule_(CronSchedule::Parse(cfg_.schedule)),
      client_(cfg_.server_url, cfg_.api_key) {
  if (!fs::is_directory(cfg_.directory)) {
    throw Error(ErrorCode::kInvalidArgument, "not a directory: " + cfg_.directory.string());
  }
  if (cfg_.ledger.empty()) cfg_.ledger = cfg_.directory / ".cyclebench-ledger.json";
  ledger_ = Ledger::Load(cfg_.ledger);
}

bool Watcher::Wanted(fs::path const& p) const {
  auto name = p.filename().string();
  if (name.empty() || name.front() == '.') return false;
  return std::any_of(cfg_.globs.begin(), cfg_.globs.end(),
                     [&](std::string const& g) { return fnmatch(g.c_str(), name.c_str(), 0) == 0; });
}

ScanReport Watcher::ScanOnce() {
  std::vector<fs::path> files;
  auto collect = [&](auto it) {
    for (auto const& entry : it) {
      if (entry.is_regular_file() && Wanted(entry.path())) files.push_back(entry.path());
    }
  };
  if (cfg_.recursive) {
    collect(fs::recursive_directory_iterator(cfg_.directory));
  } else {
    collect(fs::directory_iterator(cfg_.directory));
  }
  std::sort(files.begin(), files.end());

  ScanReport report;
  auto const now = clock_();
  for (auto const& file : files) {
    auto const rel = fs::relative(file, cfg_.directory).generic_string();
    if (auto b = backoff_.find(rel); b != backoff_.end() && now < b->second.retry_at) {
      report.deferred.push_back(rel);
      continue;
    }
    try {
      auto const size = static_cast<std::int64_t>(fs::file_size(file));
      auto const mtime = static_cast<std::int64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(fs::last_write_time(file).time_since_epoch())
              .count());
      auto const* seen = ledger_.Find(rel);
      if (seen && seen->size == size && seen->mtime_ns == mtime) {
        report.unchanged.push_back(rel);
        continue;
      }
      auto bytes = serialize::ReadFile(file);
      auto digest = Sha256Hex(bytes);
      if (seen && seen->digest == digest) {
        // Touched but identical content.
        LedgerEntry e = *seen;
        e.size = size;
        e.mtime_ns = mtime;
        ledger_.Put(e);
        ledger_.Save(cfg_.ledger);
        report.unchanged.push_back(rel);
        continue;
      }
      UploadOptions opts;
      opts.name = file.stem().string();
      opts.file_name = file.filename().string();
      opts.chunk_size = cfg_.chunk_size;
      opts.format_id = cfg_.format_id;
      if (seen) opts.project_id = seen->project_id;
      auto job = client_.Upload(bytes, opts);
      ledger_.Put({rel, size, mtime, digest, job.at("project_id").get<std::int64_t>()});
      ledger_.Save(cfg_.ledger);
      backoff_.erase(rel);
      report.uploaded.push_back(rel);
      spdlog::info("uploaded {} as project {} (job {})", rel, job.at("project_id").get<std::int64_t>(),
                   job.at("job_id").get<std::int64_t>());
    } catch (std::exception const& e) {
      auto& b = backoff_[rel];
      ++b.failures;
      auto delay = cfg_.backoff_base * (1LL << std::min(b.failures - 1, 20));
      b.retry_at = now + std::min<std::chrono::seconds>(delay, cfg_.backoff_max);
      report.failed.push_back(rel);
      spdlog::warn("upload of {} failed (attempt {}): {}", rel, b.failures, e.what());
    }
  }
  return report;
}

void Watcher::Run(std::atomic<bool> const& stop) {
  spdlog::info("watching {} on '{}'", cfg_.directory.string(), schedule_.expression());
  while (!stop) {
    auto const next = schedule_.Next(std::chrono::system_clock::now());
    while (!stop && std::chrono::system_clock::now() < next) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    if (stop) break;
    try {
      auto r = ScanOnce();
      spdlog::info("scan: {} uploaded, {} unchanged, {} failed, {} deferred", r.uploaded.size(),
                   r.unchanged.size(), r.failed.size(), r.deferred.size());
    } catch (std::exception const& e) {
      spdlog::error("scan failed: {}", e.what());
    }
  }
}

}  // namespace cyclebench::service
