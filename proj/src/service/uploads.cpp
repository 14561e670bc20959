#include "cyclebench/service/uploads.hpp"

#include <algorithm>
#include <random>

#include "cyclebench/core/digest.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"

namespace cyclebench::service {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::int64_t UploadSession::received() const {
  return std::count_if(chunk_digests.begin(), chunk_digests.end(),
                       [](auto const& d) { return d.has_value(); });
}

std::vector<std::int64_t> UploadSession::missing() const {
  std::vector<std::int64_t> out;
  for (std::size_t n = 0; n < chunk_digests.size(); ++n) {
    if (!chunk_digests[n]) out.push_back(static_cast<std::int64_t>(n));
  }
  return out;
}

Json SessionToJson(UploadSession const& s) {
  Json digests = Json::array();
  for (auto const& d : s.chunk_digests) digests.push_back(d ? Json(*d) : Json(nullptr));
  Json j;
  j["upload_id"] = s.id;
  j["name"] = s.request.name;
  j["file_name"] = s.request.file_name;
  j["size"] = s.request.size;
  j["chunk_size"] = s.request.chunk_size;
  j["chunk_count"] = s.chunk_count;
  j["project_id"] = s.request.project_id ? Json(*s.request.project_id) : Json(nullptr);
  j["format_id"] = s.request.format_id ? Json(*s.request.format_id) : Json(nullptr);
  j["metadata"] = s.request.metadata;
  j["user_id"] = s.request.user_id;
  j["received"] = s.received();
  j["missing"] = s.missing();
  j["chunk_digests"] = std::move(digests);
  j["completed"] = s.completed;
  return j;
}

namespace {

UploadSession SessionFromJson(Json const& j) {
  UploadSession s;
  s.id = j.at("upload_id").get<std::string>();
  s.request.name = j.at("name").get<std::string>();
  s.request.file_name = j.at("file_name").get<std::string>();
  s.request.size = j.at("size").get<std::int64_t>();
  s.request.chunk_size = j.at("chunk_size").get<std::int64_t>();
  if (!j.at("project_id").is_null()) s.request.project_id = j["project_id"].get<std::int64_t>();
  if (!j.at("format_id").is_null()) s.request.format_id = j["format_id"].get<std::string>();
  s.request.metadata = j.value("metadata", Json::object());
  s.request.user_id = j.value("user_id", std::int64_t{0});
  s.chunk_count = j.at("chunk_count").get<std::int64_t>();
  for (auto const& d : j.at("chunk_digests")) {
    s.chunk_digests.push_back(d.is_null() ? std::nullopt : std::optional(d.get<std::string>()));
  }
  s.completed = j.value("completed", false);
  return s;
}

std::string NewSessionId() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device rd;
  std::string out;
  for (int i = 0; i < 24; ++i) out.push_back(kHex[rd() & 0xF]);
  return out;
}

std::string ChunkName(std::int64_t n) { return "chunk-" + std::to_string(n) + ".bin"; }

std::int64_t ExpectedLength(UploadSession const& s, std::int64_t n) {
  if (n + 1 < s.chunk_count) return s.request.chunk_size;
  return s.request.size - (s.chunk_count - 1) * s.request.chunk_size;
}

}  // namespace

UploadManager::UploadManager(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  for (auto const& e : fs::directory_iterator(dir_)) {
    auto meta = e.path() / "session.json";
    if (!fs::exists(meta)) continue;
    auto slot = std::make_shared<Slot>();
    slot->session = SessionFromJson(Json::parse(serialize::ReadFile(meta)));
    sessions_[slot->session.id] = slot;
  }
}

UploadSession UploadManager::Declare(UploadRequest req) {
  if (text::Trim(req.name).empty()) throw Error(ErrorCode::kValidationError, "project name is required");
  if (text::Trim(req.file_name).empty()) throw Error(ErrorCode::kValidationError, "file name is required");
  if (req.file_name.find('/') != std::string::npos || req.file_name.find('\\') != std::string::npos) {
    throw Error(ErrorCode::kValidationError, "file name must not contain a path");
  }
  if (req.size <= 0) throw Error(ErrorCode::kValidationError, "declared size must be > 0");
  if (req.chunk_size <= 0) throw Error(ErrorCode::kValidationError, "chunk size must be > 0");
  auto slot = std::make_shared<Slot>();
  auto& s = slot->session;
  s.request = std::move(req);
  s.chunk_count = (s.request.size + s.request.chunk_size - 1) / s.request.chunk_size;
  s.chunk_digests.assign(static_cast<std::size_t>(s.chunk_count), std::nullopt);
  {
    std::lock_guard lock(mu_);
    do {
      s.id = NewSessionId();
    } while (sessions_.count(s.id));
    sessions_[s.id] = slot;
  }
  fs::create_directories(dir_ / s.id);
  Save(s);
  return s;
}

std::shared_ptr<UploadManager::Slot> UploadManager::Find(std::string const& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "upload " + id);
  return it->second;
}

void UploadManager::Save(UploadSession const& s) const {
  serialize::WriteFileAtomic(dir_ / s.id / "session.json", SessionToJson(s).dump(2) + "\n");
}

UploadSession UploadManager::Get(std::string const& id) const {
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  return slot->session;
}

UploadSession UploadManager::PutChunk(std::string const& id, std::int64_t n, std::string_view bytes,
                                      std::optional<std::string> const& claimed_digest) {
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  auto& s = slot->session;
  if (s.completed) throw Error(ErrorCode::kConflict, "upload " + id + " already completed");
  if (n < 0 || n >= s.chunk_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "chunk " + std::to_string(n) + " outside 0.." + std::to_string(s.chunk_count - 1));
  }
  auto digest = Sha256Hex(bytes);
  if (claimed_digest && text::ToLower(*claimed_digest) != digest) {
    throw Error(ErrorCode::kInvalidArgument, "chunk " + std::to_string(n) + " digest does not match body");
  }
  auto& slot_digest = s.chunk_digests[static_cast<std::size_t>(n)];
  if (slot_digest) {
    if (*slot_digest != digest) {
      throw Error(ErrorCode::kConflict, "chunk " + std::to_string(n) + " already received with different content");
    }
    return s;
  }
  if (static_cast<std::int64_t>(bytes.size()) != ExpectedLength(s, n)) {
    throw Error(ErrorCode::kInvalidArgument,
                "chunk " + std::to_string(n) + " has " + std::to_string(bytes.size()) +
                    " bytes, expected " + std::to_string(ExpectedLength(s, n)));
  }
  serialize::WriteFileAtomic(dir_ / id / ChunkName(n), bytes);
  slot_digest = digest;
  Save(s);
  return s;
}

AssembledFile UploadManager::Complete(std::string const& id,
                                      std::optional<std::string> const& expected_digest) {
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  auto& s = slot->session;
  if (s.completed) throw Error(ErrorCode::kConflict, "upload " + id + " already completed");
  auto missing = s.missing();
  if (!missing.empty()) {
    throw Error(ErrorCode::kConflict,
                std::to_string(missing.size()) + " chunk(s) missing, first is " +
                    std::to_string(missing.front()));
  }
  AssembledFile out;
  out.bytes.reserve(static_cast<std::size_t>(s.request.size));
  for (std::int64_t n = 0; n < s.chunk_count; ++n) {
    auto chunk = serialize::ReadFile(dir_ / id / ChunkName(n));
    if (Sha256Hex(chunk) != *s.chunk_digests[static_cast<std::size_t>(n)]) {
      throw Error(ErrorCode::kValidationError, "stored chunk " + std::to_string(n) + " is corrupt");
    }
    out.bytes += chunk;
  }
  if (static_cast<std::int64_t>(out.bytes.size()) != s.request.size) {
    throw Error(ErrorCode::kValidationError, "assembled size differs from declared size");
  }
  out.digest = Sha256Hex(out.bytes);
  if (expected_digest && text::ToLower(*expected_digest) != out.digest) {
    throw Error(ErrorCode::kValidationError, "file digest mismatch");
  }
  s.completed = true;
  Save(s);
  for (std::int64_t n = 0; n < s.chunk_count; ++n) {
    std::error_code ec;
    fs::remove(dir_ / id / ChunkName(n), ec);
  }
  out.session = s;
  return out;
}

}  // namespace cyclebench::service
