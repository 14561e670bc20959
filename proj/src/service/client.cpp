#include "cyclebench/service/client.hpp"

#include <thread>
#include <vector>

#include <httplib.h>

#include "cyclebench/core/digest.hpp"
#include "cyclebench/core/error.hpp"

namespace cyclebench::service {

using Json = nlohmann::ordered_json;

namespace {

ErrorCode CodeFromName(std::string const& name, int status) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::kUnauthorized); ++c) {
    if (ErrorCodeName(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  }
  switch (status) {
    case 401: return ErrorCode::kUnauthorized;
    case 403: return ErrorCode::kForbidden;
    case 404: return ErrorCode::kNotFound;
    case 409: return ErrorCode::kConflict;
    case 400: return ErrorCode::kInvalidArgument;
    default: return ErrorCode::kIoError;
  }
}

Json Check(httplib::Result const& res, std::string const& what) {
  if (!res) {
    throw Error(ErrorCode::kIoError, what + ": " + httplib::to_string(res.error()));
  }
  Json body;
  try {
    body = res->body.empty() ? Json::object() : Json::parse(res->body);
  } catch (Json::exception const&) {
    body = Json{{"message", res->body}};
  }
  if (res->status < 200 || res->status >= 300) {
    auto name = body.is_object() ? body.value("error", std::string()) : std::string();
    auto msg = body.is_object() ? body.value("message", res->body) : res->body;
    // The server already prefixes messages with the code name.
    throw Error(CodeFromName(name, res->status),
                what + " (HTTP " + std::to_string(res->status) + "): " + msg);
  }
  return body;
}

}  // namespace

UploadClient::UploadClient(std::string const& base_url, std::string api_key)
    : http_(std::make_unique<httplib::Client>(base_url)), api_key_(std::move(api_key)) {
  http_->set_bearer_token_auth(api_key_);
  http_->set_connection_timeout(10);
  http_->set_read_timeout(120);
  http_->set_write_timeout(120);
}

UploadClient::~UploadClient() = default;

Json UploadClient::Get(std::string const& path) { return Check(http_->Get(path), "GET " + path); }

Json UploadClient::Post(std::string const& path, Json const& body) {
  return Check(http_->Post(path, body.dump(), "application/json"), "POST " + path);
}

Json UploadClient::Upload(std::string const& bytes, UploadOptions const& opts) {
  Json decl;
  decl["name"] = opts.name;
  decl["file_name"] = opts.file_name;
  decl["size"] = static_cast<std::int64_t>(bytes.size());
  decl["chunk_size"] = opts.chunk_size;
  if (opts.project_id) decl["project_id"] = *opts.project_id;
  if (opts.format_id) decl["format_id"] = *opts.format_id;
  decl["metadata"] = opts.metadata;
  auto session = Post("/api/uploads", decl);
  auto const id = session.at("upload_id").get<std::string>();
  auto const count = session.at("chunk_count").get<std::int64_t>();
  auto const chunk = session.at("chunk_size").get<std::int64_t>();
  for (std::int64_t n = 0; n < count; ++n) {
    auto off = static_cast<std::size_t>(n * chunk);
    auto piece = std::string_view(bytes).substr(off, static_cast<std::size_t>(chunk));
    httplib::Headers headers{{"X-Chunk-Digest", Sha256Hex(piece)}};
    auto path = "/api/uploads/" + id + "/chunks/" + std::to_string(n);
    Check(http_->Put(path, headers, piece.data(), piece.size(), "application/octet-stream"), "PUT " + path);
  }
  return Post("/api/uploads/" + id + "/complete", Json{{"digest", Sha256Hex(bytes)}});
}

Json UploadClient::GetJob(std::int64_t job_id) { return Get("/api/jobs/" + std::to_string(job_id)); }

Json UploadClient::WaitJob(std::int64_t job_id, std::chrono::milliseconds timeout) {
  auto const deadline = std::chrono::steady_clock::now() + timeout;
  auto delay = std::chrono::milliseconds(20);
  for (;;) {
    auto job = GetJob(job_id);
    auto state = job.value("state", std::string());
    if (state != "Queued" && state != "Running") return job;
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error(ErrorCode::kIoError, "timed out waiting for job " + std::to_string(job_id));
    }
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, std::chrono::milliseconds(500));
  }
}

}  // namespace cyclebench::service
