#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "cyclebench/parsers/profile.hpp"

namespace cyclebench::parsers {

using ProfileHandle = std::shared_ptr<VendorProfile const>;

// Immutable view of the registry at one instant.
class ProfileSnapshot {
 public:
  explicit ProfileSnapshot(std::map<std::string, ProfileHandle> profiles)
      : profiles_(std::move(profiles)) {}

  ProfileHandle Find(std::string_view format_id) const;
  std::vector<std::string> Ids() const;
  std::map<std::string, ProfileHandle> const& all() const { return profiles_; }

  // The unique profile whose filename pattern and header sniff rules accept
  // (file_name, head). Only the first 4096 bytes of head are considered.
  // Throws UnknownFormat or AmbiguousFormat.
  std::string DetectFormat(std::string_view file_name, std::string_view head) const;

 private:
  std::map<std::string, ProfileHandle> profiles_;
};

// Copy-on-write registry: readers take a snapshot; Register swaps in a new
// map, so a replaced format_id is never observed half-updated.
class ProfileRegistry {
 public:
  ProfileRegistry();
  static std::unique_ptr<ProfileRegistry> WithBuiltins();

  // Last write wins for an existing format_id. Throws InvalidProfile.
  ProfileHandle Register(VendorProfile p);
  std::shared_ptr<ProfileSnapshot const> Snapshot() const;

  ProfileHandle Find(std::string_view format_id) const {
    return Snapshot()->Find(format_id);
  }
  std::string DetectFormat(std::string_view file_name, std::string_view head) const {
    return Snapshot()->DetectFormat(file_name, head);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<ProfileSnapshot const> current_;
};

inline constexpr std::size_t kSniffBytes = 4096;

}  // namespace cyclebench::parsers
