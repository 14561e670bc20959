#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cyclebench/service/client.hpp"
#include "cyclebench/service/cron.hpp"

namespace cyclebench::service {

struct WatchConfig {
  std::filesystem::path directory;
  std::vector<std::string> globs{"*"};  // fnmatch patterns on the file name
  std::string schedule = "*/5 * * * *";
  std::string server_url = "http://127.0.0.1:8080";
  std::string api_key;
  std::filesystem::path ledger;  // default <directory>/.cyclebench-ledger.json
  std::int64_t chunk_size = kDefaultChunkSize;
  bool recursive = false;
  std::optional<std::string> format_id;
  std::chrono::seconds backoff_base{60};
  std::chrono::seconds backoff_max{3600};
};

struct LedgerEntry {
  std::string path;  // relative to the watched directory, generic form
  std::int64_t size = 0;
  std::int64_t mtime_ns = 0;
  std::string digest;
  std::int64_t project_id = 0;
};

// Files already sent, so a rescan only uploads new or changed content.
class Ledger {
 public:
  static Ledger Load(std::filesystem::path const& file);
  void Save(std::filesystem::path const& file) const;

  LedgerEntry const* Find(std::string const& path) const;
  void Put(LedgerEntry e);
  std::vector<LedgerEntry> entries() const;

 private:
  std::map<std::string, LedgerEntry> entries_;
};

struct ScanReport {
  std::vector<std::string> uploaded;
  std::vector<std::string> unchanged;
  std::vector<std::string> failed;
  std::vector<std::string> deferred;  // still backing off from an earlier failure
};

class Watcher {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit Watcher(WatchConfig cfg, Clock clock = std::chrono::steady_clock::now);

  // One pass over the directory. A changed file that was uploaded before
  // goes up as a new version of its project.
  ScanReport ScanOnce();
  // Scans on every schedule tick until stop becomes true.
  void Run(std::atomic<bool> const& stop);

  Ledger const& ledger() const { return ledger_; }

 private:
  bool Wanted(std::filesystem::path const& p) const;

  WatchConfig cfg_;
  Clock clock_;
  CronSchedule schedule_;
  UploadClient client_;
  Ledger ledger_;
  struct Backoff {
    int failures = 0;
    std::chrono::steady_clock::time_point retry_at;
  };
  std::map<std::string, Backoff> backoff_;
};

}  // namespace cyclebench::service
