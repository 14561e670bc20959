#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "cyclebench/service/uploads.hpp"

namespace httplib {
class Client;
}

namespace cyclebench::service {

struct UploadOptions {
  std::string name;
  std::string file_name;
  std::int64_t chunk_size = kDefaultChunkSize;
  std::optional<std::int64_t> project_id;
  std::optional<std::string> format_id;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

// Minimal HTTP client for the ingest API. Non-2xx responses become Error
// with the code named in the response body when it is known.
class UploadClient {
 public:
  // base_url like "http://127.0.0.1:8080".
  UploadClient(std::string const& base_url, std::string api_key);
  ~UploadClient();

  // Declare, send every chunk, complete. Returns the job JSON.
  nlohmann::ordered_json Upload(std::string const& bytes, UploadOptions const& opts);
  nlohmann::ordered_json GetJob(std::int64_t job_id);
  // Polls until the job leaves Queued/Running. Throws IoError on timeout.
  nlohmann::ordered_json WaitJob(std::int64_t job_id, std::chrono::milliseconds timeout);

  nlohmann::ordered_json Get(std::string const& path);
  nlohmann::ordered_json Post(std::string const& path, nlohmann::ordered_json const& body);

 private:
  std::unique_ptr<httplib::Client> http_;
  std::string api_key_;
};

}  // namespace cyclebench::service
