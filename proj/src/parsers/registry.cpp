#include "cyclebench/parsers/registry.hpp"

#include <filesystem>
#include <regex>

#include "cyclebench/core/error.hpp"

namespace cyclebench::parsers {

ProfileHandle ProfileSnapshot::Find(std::string_view format_id) const {
  auto it = profiles_.find(std::string(format_id));
  if (it == profiles_.end()) {
    throw Error(ErrorCode::kNotFound,
                "no profile with format_id '" + std::string(format_id) + "'");
  }
  return it->second;
}

std::vector<std::string> ProfileSnapshot::Ids() const {
  std::vector<std::string> out;
  for (auto const& [id, _] : profiles_) out.push_back(id);
  return out;
}

std::string ProfileSnapshot::DetectFormat(std::string_view file_name,
                                          std::string_view head) const {
  head = head.substr(0, std::min(head.size(), kSniffBytes));
  auto base = std::filesystem::path(std::string(file_name)).filename().string();
  std::vector<std::string> matches;
  for (auto const& [id, p] : profiles_) {
    std::regex re(p->filename_pattern, std::regex::ECMAScript | std::regex::icase);
    if (!std::regex_search(base, re)) continue;
    bool all = true;
    for (auto const& needle : p->header_contains) {
      if (head.find(needle) == std::string_view::npos) {
        all = false;
        break;
      }
    }
    if (all) matches.push_back(id);
  }
  if (matches.empty()) {
    throw Error(ErrorCode::kUnknownFormat,
                "no profile recognizes '" + base + "'");
  }
  if (matches.size() > 1) throw AmbiguousFormat(std::move(matches));
  return matches.front();
}

ProfileRegistry::ProfileRegistry()
    : current_(std::make_shared<ProfileSnapshot const>(
          std::map<std::string, ProfileHandle>{})) {}

std::unique_ptr<ProfileRegistry> ProfileRegistry::WithBuiltins() {
  auto r = std::make_unique<ProfileRegistry>();
  for (auto& p : BuiltinProfiles()) r->Register(std::move(p));
  return r;
}

ProfileHandle ProfileRegistry::Register(VendorProfile p) {
  ValidateProfile(p);
  auto handle = std::make_shared<VendorProfile const>(std::move(p));
  std::lock_guard lock(mu_);
  auto next = current_->all();
  next[handle->format_id] = handle;
  current_ = std::make_shared<ProfileSnapshot const>(std::move(next));
  return handle;
}

std::shared_ptr<ProfileSnapshot const> ProfileRegistry::Snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

}  // namespace cyclebench::parsers
