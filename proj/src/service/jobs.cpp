#include "cyclebench/service/jobs.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"

namespace cyclebench::service {

using Json = nlohmann::ordered_json;

std::string_view JobStateName(JobState s) {
  switch (s) {
    case JobState::kQueued: return "Queued";
    case JobState::kRunning: return "Running";
    case JobState::kSucceeded: return "Succeeded";
    case JobState::kFailed: return "Failed";
  }
  return "Queued";
}

JobState ParseJobState(std::string_view s) {
  for (auto st : {JobState::kQueued, JobState::kRunning, JobState::kSucceeded, JobState::kFailed}) {
    if (JobStateName(st) == s) return st;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown job state '" + std::string(s) + "'");
}

namespace {

Json Ts(std::optional<Timestamp> const& t) {
  return t ? Json(text::FormatTimestamp(*t)) : Json(nullptr);
}

std::optional<Timestamp> TsFrom(Json const& j, char const* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return text::ParseTimestamp(j[key].get<std::string>());
}

}  // namespace

Json JobToJson(Job const& j) {
  Json out;
  out["job_id"] = j.id;
  out["project_id"] = j.project_id;
  out["file_version"] = j.file_version;
  out["format_id"] = j.format_id ? Json(*j.format_id) : Json(nullptr);
  out["state"] = JobStateName(j.state);
  out["error"] = j.error;
  out["error_code"] = j.error_code;
  out["project_ids"] = j.project_ids;
  out["created_at"] = text::FormatTimestamp(j.created_at);
  out["started_at"] = Ts(j.started_at);
  out["finished_at"] = Ts(j.finished_at);
  return out;
}

Job JobFromJson(Json const& j) {
  Job out;
  out.id = j.at("job_id").get<std::int64_t>();
  out.project_id = j.at("project_id").get<std::int64_t>();
  out.file_version = j.at("file_version").get<std::int64_t>();
  if (!j.at("format_id").is_null()) out.format_id = j["format_id"].get<std::string>();
  out.state = ParseJobState(j.at("state").get<std::string>());
  out.error = j.value("error", "");
  out.error_code = j.value("error_code", "");
  out.project_ids = j.value("project_ids", std::vector<std::int64_t>{});
  out.created_at = TsFrom(j, "created_at").value_or(Timestamp{});
  out.started_at = TsFrom(j, "started_at");
  out.finished_at = TsFrom(j, "finished_at");
  return out;
}

JobQueue::JobQueue(std::filesystem::path journal, Runner runner, std::size_t workers,
                   store::Clock clock)
    : journal_(std::move(journal)), runner_(std::move(runner)), clock_(std::move(clock)) {
  std::filesystem::create_directories(journal_.parent_path());
  if (std::filesystem::exists(journal_)) {
    for (auto const& line : csv::SplitLines(serialize::ReadFile(journal_))) {
      if (text::Trim(line).empty()) continue;
      try {
        auto job = JobFromJson(Json::parse(line));
        jobs_[job.id] = job;
      } catch (std::exception const& e) {
        // A torn final line from a crash mid-append.
        spdlog::warn("skipping unreadable job journal line: {}", e.what());
      }
    }
  }
  for (auto& [id, job] : jobs_) {
    if (job.state == JobState::kQueued || job.state == JobState::kRunning) {
      job.state = JobState::kQueued;
      job.started_at.reset();
      Record(job);
      queue_.push_back(id);
    }
  }
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { Work(); });
}

JobQueue::~JobQueue() { Stop(); }

void JobQueue::Stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
}

void JobQueue::Record(Job const& j) {
  std::ofstream out(journal_, std::ios::app | std::ios::binary);
  out << JobToJson(j).dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "cannot append to " + journal_.string());
}

Job JobQueue::Submit(std::int64_t project_id, std::int64_t file_version,
                     std::optional<std::string> format_id) {
  Job job;
  {
    std::lock_guard lock(mu_);
    job.id = jobs_.empty() ? 1 : jobs_.rbegin()->first + 1;
    job.project_id = project_id;
    job.file_version = file_version;
    job.format_id = std::move(format_id);
    job.created_at = clock_();
    Record(job);
    jobs_[job.id] = job;
    queue_.push_back(job.id);
  }
  cv_.notify_one();
  return job;
}

Job JobQueue::Get(std::int64_t id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kNotFound, "job " + std::to_string(id));
  return it->second;
}

std::vector<Job> JobQueue::List() const {
  std::lock_guard lock(mu_);
  std::vector<Job> out;
  for (auto const& [id, j] : jobs_) out.push_back(j);
  return out;
}

bool JobQueue::WaitIdle(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return idle_cv_.wait_for(lock, timeout, [this] { return queue_.empty() && running_ == 0; });
}

void JobQueue::Work() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      auto id = queue_.front();
      queue_.pop_front();
      auto& stored = jobs_[id];
      stored.state = JobState::kRunning;
      stored.started_at = clock_();
      Record(stored);
      job = stored;
      ++running_;
    }
    try {
      job.project_ids = runner_(job);
      job.state = JobState::kSucceeded;
    } catch (Error const& e) {
      job.state = JobState::kFailed;
      job.error = e.what();
      job.error_code = std::string(e.code_name());
    } catch (std::exception const& e) {
      job.state = JobState::kFailed;
      job.error = e.what();
      job.error_code = "Internal";
    }
    if (job.state == JobState::kFailed) {
      spdlog::warn("job {} for project {} failed: {}", job.id, job.project_id, job.error);
    }
    {
      std::lock_guard lock(mu_);
      job.finished_at = clock_();
      Record(job);
      jobs_[job.id] = job;
      --running_;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace cyclebench::service
