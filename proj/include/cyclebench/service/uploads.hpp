#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cyclebench::service {

inline constexpr std::int64_t kDefaultChunkSize = 8 * 1024 * 1024;

struct UploadRequest {
  std::string name;       // project name
  std::string file_name;
  std::int64_t size = 0;  // declared bytes
  std::int64_t chunk_size = kDefaultChunkSize;
  std::optional<std::int64_t> project_id;  // new version of an existing project
  std::optional<std::string> format_id;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::int64_t user_id = 0;
};

struct UploadSession {
  std::string id;
  UploadRequest request;
  std::int64_t chunk_count = 0;
  std::vector<std::optional<std::string>> chunk_digests;  // SHA-256 per received chunk
  bool completed = false;

  std::int64_t received() const;
  std::vector<std::int64_t> missing() const;
};

nlohmann::ordered_json SessionToJson(UploadSession const& s);

struct AssembledFile {
  UploadSession session;
  std::string bytes;
  std::string digest;
};

// Chunk staging under <dir>/<session id>/. Sessions lock independently.
class UploadManager {
 public:
  explicit UploadManager(std::filesystem::path dir);

  // Throws ValidationError for a missing name, file name or size.
  UploadSession Declare(UploadRequest req);
  UploadSession Get(std::string const& id) const;
  // Re-sending a chunk with identical bytes is a no-op; different bytes
  // throw Conflict. Wrong index or length throws InvalidArgument.
  UploadSession PutChunk(std::string const& id, std::int64_t n, std::string_view bytes,
                         std::optional<std::string> const& claimed_digest = {});
  // Throws Conflict while chunks are missing or after completion, and
  // ValidationError on a size or whole-file digest mismatch.
  AssembledFile Complete(std::string const& id, std::optional<std::string> const& expected_digest = {});

 private:
  struct Slot {
    std::mutex mu;
    UploadSession session;
  };
  std::shared_ptr<Slot> Find(std::string const& id) const;
  void Save(UploadSession const& s) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace cyclebench::service
