#include "cyclebench/service/pipeline.hpp"

#include <algorithm>

#include "cyclebench/core/error.hpp"
#include "cyclebench/engine/cycle_stats.hpp"
#include "cyclebench/parsers/parser.hpp"

namespace cyclebench::service {

std::string_view StatusColor(ProjectStatus s) {
  switch (s) {
    case ProjectStatus::kReady: return "black";
    case ProjectStatus::kFailed: return "red";
    case ProjectStatus::kPending:
    case ProjectStatus::kProcessing: return "grey";
  }
  return "grey";
}

namespace {

void MarkFailed(store::Store& st, std::int64_t project_id, std::string const& message,
                std::string const& detail) {
  try {
    auto p = st.GetProject(project_id);
    p.status = ProjectStatus::kFailed;
    p.error = message.empty() ? "processing failed" : message;
    p.error_detailed = detail;
    p.processing_message.clear();
    st.UpdateProject(p);
  } catch (std::exception const&) {
    // The original error is more useful to the caller than this one.
  }
}

}  // namespace

IngestResult IngestFile(store::Store& st, parsers::ProfileSnapshot const& profiles,
                        std::int64_t primary_project, std::string_view bytes,
                        std::optional<std::string> const& format_id) {
  auto primary = st.GetProject(primary_project);
  primary.status = ProjectStatus::kProcessing;
  primary.error.clear();
  primary.error_detailed.clear();
  primary.processing_message = "parsing";
  st.UpdateProject(primary);

  try {
    parsers::ParseOptions opts;
    opts.file_name = primary.file_name;
    auto converted = format_id ? parsers::ConvertBytesWithProfile(*profiles.Find(*format_id),
                                                                  primary.file_name, bytes, opts)
                               : parsers::ConvertBytes(profiles, primary.file_name, bytes, opts);

    std::vector<engine::ProcessedDataset> processed;
    for (auto const& d : converted.datasets) processed.push_back(engine::ProcessDataset(d));

    // The primary keeps the channel it had from an earlier version if that
    // channel is still present; otherwise it takes the lowest one.
    std::size_t primary_slot = 0;
    for (std::size_t k = 0; k < processed.size(); ++k) {
      if (primary.channel != 0 && processed[k].dataset.channel == primary.channel) primary_slot = k;
    }
    std::vector<ProjectRecord> siblings;
    for (auto const& p : st.ListProjects()) {
      if (p.id != primary.id && !primary.internal_file_name.empty() &&
          p.internal_file_name == primary.internal_file_name) {
        siblings.push_back(p);
      }
    }

    IngestResult result;
    result.format_id = converted.format_id;
    auto write = [&](ProjectRecord p, engine::ProcessedDataset const& pd) {
      p.channel = pd.dataset.channel;
      p.status = ProjectStatus::kProcessing;
      p.processing_message = "storing";
      p.error.clear();
      p.error_detailed.clear();
      if (!pd.dataset.points.empty() && pd.dataset.points.front().wall_time) {
        p.test_date = *pd.dataset.points.front().wall_time;
      }
      st.UpdateProject(p);
      st.PutDataset(p.id, pd.dataset, pd.stats, pd.rollup);
      p = st.GetProject(p.id);
      p.processing_message.clear();
      st.UpdateProject(p);
      result.project_ids.push_back(p.id);
    };

    write(primary, processed[primary_slot]);
    for (std::size_t k = 0; k < processed.size(); ++k) {
      if (k == primary_slot) continue;
      auto channel = processed[k].dataset.channel;
      auto it = std::find_if(siblings.begin(), siblings.end(),
                             [&](ProjectRecord const& p) { return p.channel == channel; });
      if (it != siblings.end()) {
        write(st.GetProject(it->id), processed[k]);
        continue;
      }
      ProjectRecord draft = st.GetProject(primary.id);
      draft.id = 0;
      draft.created_at.reset();
      draft.job_id = primary.job_id;
      draft.num_cycles = 0;
      draft.channel = channel;
      auto id = st.CreateProject(draft);
      write(st.GetProject(id), processed[k]);
    }
    return result;
  } catch (Error const& e) {
    MarkFailed(st, primary_project, e.what(),
               std::string(e.code_name()) + " while processing " + primary.file_name);
    throw;
  } catch (std::exception const& e) {
    MarkFailed(st, primary_project, e.what(), "internal error while processing " + primary.file_name);
    throw;
  }
}

}  // namespace cyclebench::service
