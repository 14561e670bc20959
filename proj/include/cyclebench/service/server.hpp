#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "cyclebench/parsers/registry.hpp"
#include "cyclebench/service/jobs.hpp"
#include "cyclebench/service/uploads.hpp"
#include "cyclebench/store/store.hpp"

namespace httplib {
class Server;
}

namespace cyclebench::service {

struct ServiceConfig {
  std::filesystem::path data_dir = "cyclebench-data";
  std::string bind_addr = "127.0.0.1:8080";
  std::int64_t shards = 1;
  int retention_days = store::kDefaultRetentionDays;
  std::size_t workers = 2;
  std::optional<std::filesystem::path> profiles_dir;  // extra profiles loaded at start
  store::Clock clock = store::SystemNow;

  // CYCLEBENCH_DATA_DIR, CYCLEBENCH_BIND_ADDR, CYCLEBENCH_SHARDS,
  // CYCLEBENCH_RETENTION_DAYS over the defaults above.
  static ServiceConfig FromEnv();
};

// "host:port" -> (host, port). Throws InvalidArgument.
std::pair<std::string, int> SplitBindAddr(std::string const& addr);

// Embedded API description served at /api/openapi.json.
std::string_view OpenApiDocument();

class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(Service const&) = delete;
  Service& operator=(Service const&) = delete;

  store::Store& store() { return *store_; }
  parsers::ProfileRegistry& profiles() { return *profiles_; }
  JobQueue& jobs() { return *jobs_; }
  UploadManager& uploads() { return *uploads_; }
  ServiceConfig const& config() const { return cfg_; }

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port.
  int Start(std::string const& host, int port);
  // Serves on the calling thread until Stop().
  void Listen(std::string const& host, int port);
  void Stop();

  std::vector<store::FileVersion> SweepNow();

 private:
  void Routes();
  void SweepLoop();

  ServiceConfig cfg_;
  std::unique_ptr<store::Store> store_;
  std::unique_ptr<parsers::ProfileRegistry> profiles_;
  std::unique_ptr<UploadManager> uploads_;
  std::unique_ptr<JobQueue> jobs_;
  std::unique_ptr<httplib::Server> http_;
  std::thread server_thread_;
  std::thread sweep_thread_;
  std::mutex sweep_mu_;
  std::condition_variable sweep_cv_;
  bool stopping_ = false;
};

}  // namespace cyclebench::service
