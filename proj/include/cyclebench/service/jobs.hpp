#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cyclebench/store/store.hpp"

namespace cyclebench::service {

enum class JobState { kQueued, kRunning, kSucceeded, kFailed };

std::string_view JobStateName(JobState s);
JobState ParseJobState(std::string_view s);

struct Job {
  std::int64_t id = 0;
  std::int64_t project_id = 0;
  std::int64_t file_version = 0;
  std::optional<std::string> format_id;
  JobState state = JobState::kQueued;
  std::string error;
  std::string error_code;
  std::vector<std::int64_t> project_ids;  // every project written by the job
  Timestamp created_at{};
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
};

nlohmann::ordered_json JobToJson(Job const& j);
Job JobFromJson(nlohmann::ordered_json const& j);

// In-process parse queue on a bounded worker pool. Every transition is
// appended to a journal; on construction, jobs that were Queued or Running
// are put back on the queue.
class JobQueue {
 public:
  // Returns the ids of the projects written; throws to fail the job.
  using Runner = std::function<std::vector<std::int64_t>(Job const&)>;

  JobQueue(std::filesystem::path journal, Runner runner, std::size_t workers,
           store::Clock clock = store::SystemNow);
  ~JobQueue();
  JobQueue(JobQueue const&) = delete;
  JobQueue& operator=(JobQueue const&) = delete;

  Job Submit(std::int64_t project_id, std::int64_t file_version,
             std::optional<std::string> format_id = {});
  Job Get(std::int64_t id) const;  // throws NotFound
  std::vector<Job> List() const;
  // True once nothing is queued or running.
  bool WaitIdle(std::chrono::milliseconds timeout);
  void Stop();

 private:
  void Work();
  void Record(Job const& j);

  std::filesystem::path journal_;
  Runner runner_;
  store::Clock clock_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::map<std::int64_t, Job> jobs_;
  std::deque<std::int64_t> queue_;
  std::size_t running_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace cyclebench::service
