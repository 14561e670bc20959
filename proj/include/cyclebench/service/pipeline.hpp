#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclebench/parsers/registry.hpp"
#include "cyclebench/store/store.hpp"

namespace cyclebench::service {

struct IngestResult {
  std::string format_id;
  std::vector<std::int64_t> project_ids;  // primary first, then sibling channels
};

// detect -> parse -> normalize -> derive -> segment -> stats -> store for
// every channel in the file. The primary project receives one channel;
// further channels go to sibling projects that share its internal file
// name, created on first sight. On failure the primary project is marked
// Failed with the error text and the error is rethrown.
IngestResult IngestFile(store::Store& st, parsers::ProfileSnapshot const& profiles,
                        std::int64_t primary_project, std::string_view bytes,
                        std::optional<std::string> const& format_id = {});

// Status colour used by the project list.
std::string_view StatusColor(ProjectStatus s);

}  // namespace cyclebench::service
