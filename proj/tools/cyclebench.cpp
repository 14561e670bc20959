#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "cyclebench/analysis/dqdv.hpp"
#include "cyclebench/analysis/gitt.hpp"
#include "cyclebench/analysis/plot.hpp"
#include "cyclebench/core/columns.hpp"
#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/serialize.hpp"
#include "cyclebench/core/text.hpp"
#include "cyclebench/engine/cycle_stats.hpp"
#include "cyclebench/parsers/parser.hpp"
#include "cyclebench/parsers/registry.hpp"
#include "cyclebench/service/client.hpp"
#include "cyclebench/service/pipeline.hpp"
#include "cyclebench/service/server.hpp"
#include "cyclebench/service/watcher.hpp"
#include "cyclebench/store/store.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace cyclebench;

namespace {

std::atomic<bool> g_stop{false};
service::Service* g_service = nullptr;

void OnSignal(int) {
  g_stop = true;
  if (g_service) g_service->Stop();
}

std::string EnvOr(char const* name, std::string fallback) {
  auto const* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

struct InputOptions {
  std::string path;
  std::optional<std::string> profile;
  std::optional<std::string> profiles_dir;
  std::optional<std::int64_t> channel;
};

void AddInputOptions(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("input", in.path, "Cycler export file or converted dataset directory")->required();
  cmd->add_option("--profile", in.profile, "Force a vendor profile instead of detecting one");
  cmd->add_option("--profiles-dir", in.profiles_dir, "Extra vendor profiles (*.json)");
  cmd->add_option("--channel", in.channel, "Channel to use from a multi-channel file");
}

std::unique_ptr<parsers::ProfileRegistry> Registry(std::optional<std::string> const& extra) {
  auto reg = parsers::ProfileRegistry::WithBuiltins();
  if (extra) {
    for (auto& p : parsers::LoadProfilesDir(*extra)) reg->Register(std::move(p));
  }
  return reg;
}

parsers::ConvertedFile ConvertPath(InputOptions const& in) {
  auto reg = Registry(in.profiles_dir);
  auto bytes = serialize::ReadFile(in.path);
  auto name = fs::path(in.path).filename().string();
  if (in.profile) return parsers::ConvertBytesWithProfile(*reg->Find(*in.profile), name, bytes);
  return parsers::ConvertBytes(*reg->Snapshot(), name, bytes);
}

CanonicalDataset LoadDataset(InputOptions const& in) {
  if (fs::is_directory(in.path)) return serialize::ReadDatasetDir(in.path);
  auto conv = ConvertPath(in);
  if (!in.channel) {
    if (conv.datasets.size() > 1) {
      spdlog::warn("{} has {} channels; using channel {} (pick one with --channel)", in.path,
                   conv.datasets.size(), conv.datasets.front().channel);
    }
    return std::move(conv.datasets.front());
  }
  for (auto& d : conv.datasets) {
    if (d.channel == *in.channel) return std::move(d);
  }
  throw Error(ErrorCode::kNotFound, "channel " + std::to_string(*in.channel) + " not in " + in.path);
}

std::unique_ptr<store::Store> OpenStore(std::string const& data_dir, std::int64_t shards = 1) {
  return store::OpenFileStore(fs::path(data_dir) / "store", {shards, store::SystemNow});
}

void WriteOut(std::optional<std::string> const& out, std::string const& text) {
  if (out) {
    serialize::WriteFileAtomic(*out, text);
  } else {
    std::cout << text;
  }
}

std::string CyclesCsv(std::vector<CycleStats> const& cycles) {
  auto table = store::CyclesTable(cycles, 0);
  std::string out;
  std::vector<std::string> header;
  for (auto const& c : table["columns"]) header.push_back(c.get<std::string>());
  csv::AppendRow(out, header);
  for (auto const& row : table["rows"]) {
    std::vector<std::string> cells;
    for (auto const& v : row) {
      if (v.is_null()) {
        cells.emplace_back();
      } else if (v.is_string()) {
        cells.push_back(v.get<std::string>());
      } else if (v.is_number_float()) {
        cells.push_back(text::FormatDouble(v.get<double>()));
      } else {
        cells.push_back(v.dump());
      }
    }
    csv::AppendRow(out, cells);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cyclebench: battery cycler data ingestion and analysis"};
  app.require_subcommand(1);
  std::string data_dir = EnvOr("CYCLEBENCH_DATA_DIR", "cyclebench-data");
  app.add_option("--data-dir", data_dir, "Service data directory (CYCLEBENCH_DATA_DIR)");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP ingest service");
  std::optional<std::string> bind;
  std::optional<std::int64_t> shards;
  std::optional<int> retention;
  std::size_t workers = 2;
  std::optional<std::string> serve_profiles;
  serve->add_option("--bind", bind, "host:port (CYCLEBENCH_BIND_ADDR)");
  serve->add_option("--shards", shards, "Shard count for a new store (CYCLEBENCH_SHARDS)");
  serve->add_option("--retention-days", retention, "File version retention (CYCLEBENCH_RETENTION_DAYS)");
  serve->add_option("--workers", workers, "Parse job workers")->check(CLI::PositiveNumber);
  serve->add_option("--profiles-dir", serve_profiles, "Extra vendor profiles (*.json)");

  // watch
  auto* watch = app.add_subcommand("watch", "Upload new files from a directory on a schedule");
  service::WatchConfig wcfg;
  wcfg.server_url = EnvOr("CYCLEBENCH_URL", wcfg.server_url);
  wcfg.api_key = EnvOr("CYCLEBENCH_API_KEY", "");
  std::string ledger_path;
  bool watch_once = false;
  watch->add_option("directory", wcfg.directory, "Directory to watch")->required();
  watch->add_option("--glob", wcfg.globs, "File name patterns (default *)");
  watch->add_option("--schedule", wcfg.schedule, "Cron expression");
  watch->add_option("--server", wcfg.server_url, "Service URL (CYCLEBENCH_URL)");
  watch->add_option("--api-key", wcfg.api_key, "API key (CYCLEBENCH_API_KEY)");
  watch->add_option("--ledger", ledger_path, "Dedupe ledger file");
  watch->add_option("--chunk-size", wcfg.chunk_size, "Upload chunk size in bytes")->check(CLI::PositiveNumber);
  watch->add_option("--format", wcfg.format_id, "Force a vendor profile");
  watch->add_flag("--recursive", wcfg.recursive, "Descend into subdirectories");
  watch->add_flag("--once", watch_once, "Scan once and exit");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Ingest files into the local store or a running service");
  std::vector<std::string> ingest_files;
  std::optional<std::string> ingest_name;
  std::optional<std::string> ingest_format;
  std::optional<std::int64_t> ingest_project;
  std::optional<std::int64_t> ingest_user;
  std::optional<std::string> ingest_server;
  std::string ingest_key = EnvOr("CYCLEBENCH_API_KEY", "");
  std::int64_t ingest_chunk = service::kDefaultChunkSize;
  ingest->add_option("files", ingest_files, "Files to ingest")->required()->check(CLI::ExistingFile);
  ingest->add_option("--name", ingest_name, "Project name (default: file stem)");
  ingest->add_option("--format", ingest_format, "Force a vendor profile");
  ingest->add_option("--project-id", ingest_project, "Store as a new version of this project");
  ingest->add_option("--user", ingest_user, "Owner user id for local ingest");
  ingest->add_option("--server", ingest_server, "Upload to this service instead of the local store");
  ingest->add_option("--api-key", ingest_key, "API key (CYCLEBENCH_API_KEY)");
  ingest->add_option("--chunk-size", ingest_chunk, "Upload chunk size in bytes")->check(CLI::PositiveNumber);

  // ls
  auto* ls = app.add_subcommand("ls", "List projects in the local store");
  std::string ls_filter;
  bool ls_json = false;
  ls->add_option("--filter", ls_filter, "Substring of name, file name or test name");
  ls->add_flag("--json", ls_json, "JSON output");

  // stats
  auto* stats = app.add_subcommand("stats", "Per-cycle statistics of a file or stored project");
  InputOptions stats_in;
  std::optional<std::int64_t> stats_project;
  bool stats_json = false;
  bool stats_csv = false;
  std::string stats_reference = "first";
  stats->add_option("input", stats_in.path, "Cycler export file or converted dataset directory");
  stats->add_option("--profile", stats_in.profile, "Force a vendor profile");
  stats->add_option("--profiles-dir", stats_in.profiles_dir, "Extra vendor profiles (*.json)");
  stats->add_option("--channel", stats_in.channel, "Channel to use from a multi-channel file");
  stats->add_option("--project", stats_project, "Read a stored project instead of a file");
  stats->add_option("--reference", stats_reference, "Retention reference: first or max")
      ->check(CLI::IsMember({"first", "max"}));
  auto* sj = stats->add_flag("--json", stats_json, "JSON: cycles and rollup");
  stats->add_flag("--csv", stats_csv, "CSV of the cycle table (default)")->excludes(sj);

  // plot
  auto* plot = app.add_subcommand("plot", "Plot data for one or more files");
  std::vector<std::string> plot_inputs;
  std::string plot_x = "cycle";
  std::string plot_y1 = "discharge_capacity";
  std::optional<std::string> plot_y2;
  std::string plot_format = "json";
  std::optional<std::string> plot_out;
  std::size_t plot_max = analysis::kDefaultMaxPoints;
  plot->add_option("inputs", plot_inputs, "Files or dataset directories")->required();
  plot->add_option("--x", plot_x, "X variable");
  plot->add_option("--y1", plot_y1, "Primary Y variable");
  plot->add_option("--y2", plot_y2, "Secondary Y variable");
  plot->add_option("--format", plot_format, "json, csv or svg")->check(CLI::IsMember({"json", "csv", "svg"}));
  plot->add_option("--out", plot_out, "Output file (default stdout)");
  plot->add_option("--max-points", plot_max, "Point-domain decimation target")->check(CLI::Range(4, 10000000));

  // dqdv
  auto* dqdv = app.add_subcommand("dqdv", "Differential capacity of one half-cycle");
  InputOptions dqdv_in;
  std::int64_t dqdv_cycle = 1;
  std::string dqdv_dir = "discharge";
  analysis::DqdvOptions dqdv_opts;
  std::optional<double> dqdv_prom;
  bool dqdv_csv = false;
  AddInputOptions(dqdv, dqdv_in);
  dqdv->add_option("--cycle", dqdv_cycle, "Cycle index (1-based)");
  dqdv->add_option("--direction", dqdv_dir, "charge or discharge")->check(CLI::IsMember({"charge", "discharge"}));
  dqdv->add_option("--dv", dqdv_opts.dv, "Voltage bin width in V");
  dqdv->add_option("--smooth", dqdv_opts.smooth_window, "Moving-average window (odd, 0 = off)");
  dqdv->add_option("--min-prominence", dqdv_prom, "Peak prominence threshold in Ah/V");
  dqdv->add_flag("--csv", dqdv_csv, "CSV of voltage,dqdv instead of JSON");

  // gitt
  auto* gitt = app.add_subcommand("gitt", "Diffusivity per titration pulse");
  InputOptions gitt_in;
  analysis::GittConfig gitt_cfg;
  bool gitt_csv = false;
  AddInputOptions(gitt, gitt_in);
  gitt->add_option("--molar-volume-term", gitt_cfg.molar_volume_term, "m_B V_M / M_B");
  gitt->add_option("--area", gitt_cfg.contact_area, "Electrode contact area S");
  gitt->add_option("--rest-threshold", gitt_cfg.rest_threshold, "|I| below this is rest (A)");
  gitt->add_option("--ir-skip", gitt_cfg.ir_skip_samples, "Samples skipped after pulse start");
  gitt->add_flag("--csv", gitt_csv, "CSV instead of JSON");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert a cycler export to canonical dataset directories");
  InputOptions conv_in;
  std::string conv_out;
  convert->add_option("input", conv_in.path, "Cycler export file")->required()->check(CLI::ExistingFile);
  convert->add_option("--profile", conv_in.profile, "Force a vendor profile");
  convert->add_option("--profiles-dir", conv_in.profiles_dir, "Extra vendor profiles (*.json)");
  convert->add_option("--out", conv_out, "Output directory")->required();

  // fsck
  auto* fsck = app.add_subcommand("fsck", "Check store consistency");

  // user
  auto* user = app.add_subcommand("user", "Manage users");
  user->require_subcommand(1);
  auto* user_add = user->add_subcommand("add", "Create a user and print the API key");
  std::string user_name;
  std::optional<std::string> user_key;
  user_add->add_option("name", user_name, "User name")->required();
  user_add->add_option("--key", user_key, "Use this API key instead of a random one");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Delete file versions past retention");
  int sweep_days = store::kDefaultRetentionDays;
  if (auto v = text::ParseInt(EnvOr("CYCLEBENCH_RETENTION_DAYS", ""))) sweep_days = static_cast<int>(*v);
  sweep->add_option("--retention-days", sweep_days, "Retention period (CYCLEBENCH_RETENTION_DAYS)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_default_logger(spdlog::default_logger()->clone("cyclebench"));

  try {
    if (*serve) {
      auto cfg = service::ServiceConfig::FromEnv();
      if (app.get_option("--data-dir")->count()) cfg.data_dir = data_dir;
      if (bind) cfg.bind_addr = *bind;
      if (shards) cfg.shards = *shards;
      if (retention) cfg.retention_days = *retention;
      cfg.workers = workers;
      if (serve_profiles) cfg.profiles_dir = *serve_profiles;
      auto [host, port] = service::SplitBindAddr(cfg.bind_addr);
      service::Service svc(cfg);
      g_service = &svc;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      svc.Listen(host, port);
      g_service = nullptr;
      return 0;
    }

    if (*watch) {
      if (!ledger_path.empty()) wcfg.ledger = ledger_path;
      service::Watcher w(wcfg);
      if (watch_once) {
        auto r = w.ScanOnce();
        std::cout << Json{{"uploaded", r.uploaded}, {"unchanged", r.unchanged}, {"failed", r.failed}}.dump(2)
                  << "\n";
        return r.failed.empty() ? 0 : 1;
      }
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      w.Run(g_stop);
      return 0;
    }

    if (*ingest) {
      if (ingest_files.size() > 1 && (ingest_name || ingest_project)) {
        throw Error(ErrorCode::kInvalidArgument, "--name and --project-id take a single file");
      }
      Json out = Json::array();
      if (ingest_server) {
        service::UploadClient client(*ingest_server, ingest_key);
        for (auto const& f : ingest_files) {
          service::UploadOptions opts;
          opts.name = ingest_name.value_or(fs::path(f).stem().string());
          opts.file_name = fs::path(f).filename().string();
          opts.chunk_size = ingest_chunk;
          opts.project_id = ingest_project;
          opts.format_id = ingest_format;
          auto job = client.Upload(serialize::ReadFile(f), opts);
          out.push_back(client.WaitJob(job.at("job_id").get<std::int64_t>(), std::chrono::minutes(10)));
        }
      } else {
        auto st = OpenStore(data_dir);
        auto reg = parsers::ProfileRegistry::WithBuiltins();
        std::int64_t owner = 0;
        if (ingest_user) {
          owner = st->GetUser(*ingest_user).id;
        } else {
          try {
            owner = st->GetUser(1).id;
          } catch (Error const&) {
            auto u = st->AddUser("local");
            spdlog::info("created user 'local' (id {}), API key {}", u.id, u.api_key);
            owner = u.id;
          }
        }
        for (auto const& f : ingest_files) {
          auto bytes = serialize::ReadFile(f);
          std::int64_t pid = 0;
          if (ingest_project) {
            pid = st->GetProject(*ingest_project).id;
          } else {
            ProjectRecord draft;
            draft.name = ingest_name.value_or(fs::path(f).stem().string());
            draft.file_name = fs::path(f).filename().string();
            draft.file_size = static_cast<std::int64_t>(bytes.size());
            draft.user_id = owner;
            pid = st->CreateProject(draft);
            auto p = st->GetProject(pid);
            p.internal_file_name = std::to_string(pid) + "/" + p.file_name;
            st->UpdateProject(p);
          }
          auto version = st->StoreFileVersion(pid, bytes);
          Json row{{"file", f}, {"project_id", pid}, {"file_version", version.version}};
          try {
            auto r = service::IngestFile(*st, *reg->Snapshot(), pid, bytes, ingest_format);
            row["state"] = "Succeeded";
            row["format_id"] = r.format_id;
            row["project_ids"] = r.project_ids;
          } catch (Error const& e) {
            row["state"] = "Failed";
            row["error"] = e.what();
          }
          out.push_back(row);
        }
      }
      std::cout << out.dump(2) << "\n";
      for (auto const& r : out) {
        if (r.value("state", "") != "Succeeded") return 1;
      }
      return 0;
    }

    if (*ls) {
      auto st = OpenStore(data_dir);
      Json rows = Json::array();
      for (auto const& p : st->ListProjects()) {
        if (!ls_filter.empty() && !text::ContainsIgnoreCase(p.name, ls_filter) &&
            !text::ContainsIgnoreCase(p.file_name, ls_filter) && !text::ContainsIgnoreCase(p.test_name, ls_filter)) {
          continue;
        }
        rows.push_back(Json{{"id", p.id},
                            {"name", p.name},
                            {"file", p.file_name},
                            {"channel", p.channel},
                            {"cycles", p.num_cycles},
                            {"size", store::FormatFileSize(p.file_size)},
                            {"status", ProjectStatusName(p.status)},
                            {"error", p.error}});
      }
      if (ls_json) {
        std::cout << rows.dump(2) << "\n";
      } else {
        std::printf("%-6s %-32s %-28s %4s %7s %10s  %s\n", "ID", "NAME", "FILE", "CH", "CYCLES", "SIZE", "STATUS");
        for (auto const& r : rows) {
          std::printf("%-6lld %-32s %-28s %4lld %7lld %10s  %s\n", static_cast<long long>(r["id"].get<std::int64_t>()),
                      r["name"].get<std::string>().c_str(), r["file"].get<std::string>().c_str(),
                      static_cast<long long>(r["channel"].get<std::int64_t>()),
                      static_cast<long long>(r["cycles"].get<std::int64_t>()), r["size"].get<std::string>().c_str(),
                      r["status"].get<std::string>().c_str());
        }
      }
      return 0;
    }

    if (*stats) {
      std::vector<CycleStats> cycles;
      StatisticRollup rollup;
      if (stats_project) {
        auto st = OpenStore(data_dir);
        auto stored = st->GetDataset(*stats_project);
        cycles = stored.cycles;
        rollup = stored.rollup;
      } else {
        if (stats_in.path.empty()) throw Error(ErrorCode::kInvalidArgument, "give an input file or --project");
        engine::StatsOptions opts;
        opts.reference = stats_reference == "max" ? engine::RetentionReference::kMaxCapacity
                                                  : engine::RetentionReference::kFirstComplete;
        auto processed = engine::ProcessDataset(LoadDataset(stats_in), opts);
        cycles = std::move(processed.stats);
        rollup = std::move(processed.rollup);
      }
      if (stats_json) {
        Json rows = Json::array();
        for (auto const& c : cycles) rows.push_back(serialize::CycleRow(c, stats_project.value_or(0)));
        std::cout << Json{{"cycles", rows}, {"rollup", serialize::RollupStatistics(rollup)}}.dump(2) << "\n";
      } else {
        std::cout << CyclesCsv(cycles);
      }
      return 0;
    }

    if (*plot) {
      std::vector<CanonicalDataset> datasets;
      std::vector<std::vector<CycleStats>> cycles;
      datasets.reserve(plot_inputs.size());
      cycles.reserve(plot_inputs.size());
      std::vector<analysis::PlotSource> sources;
      for (std::size_t k = 0; k < plot_inputs.size(); ++k) {
        InputOptions in;
        in.path = plot_inputs[k];
        auto processed = engine::ProcessDataset(LoadDataset(in));
        datasets.push_back(std::move(processed.dataset));
        cycles.push_back(std::move(processed.stats));
        sources.push_back({static_cast<std::int64_t>(k + 1), fs::path(in.path).filename().string(), &cycles.back(),
                           &datasets.back()});
      }
      analysis::PlotOptions opts;
      opts.max_points = plot_max;
      auto series = analysis::BuildPlotSeries(
          sources, plot_x, plot_y1, plot_y2 ? std::optional<std::string_view>(*plot_y2) : std::nullopt, opts);
      if (plot_format == "csv") {
        WriteOut(plot_out, analysis::PlotSeriesToCsv(series));
      } else if (plot_format == "svg") {
        WriteOut(plot_out, analysis::PlotSeriesToSvg(series));
      } else {
        WriteOut(plot_out, analysis::PlotSeriesToJson(series).dump(2) + "\n");
      }
      return 0;
    }

    if (*dqdv) {
      auto curve = analysis::Dqdv(LoadDataset(dqdv_in), dqdv_cycle, analysis::ParseDirection(dqdv_dir), dqdv_opts);
      if (dqdv_csv) {
        std::string out;
        csv::AppendRow(out, std::vector<std::string>{"voltage", "dqdv"});
        for (std::size_t k = 0; k < curve.dqdv.size(); ++k) {
          csv::AppendRow(out, std::vector<std::string>{text::FormatDouble(curve.voltage_bins[k]), text::FormatDouble(curve.dqdv[k])});
        }
        std::cout << out;
        return 0;
      }
      Json peaks = Json::array();
      for (auto const& p : analysis::FindPeaks(curve, dqdv_prom)) {
        peaks.push_back(
            Json{{"position", p.position}, {"intensity", p.intensity}, {"prominence", p.prominence}, {"area", p.area}});
      }
      Json out;
      out["cycle_index"] = curve.cycle_index;
      out["direction"] = analysis::DirectionName(curve.direction);
      out["dv"] = curve.dv;
      out["smoothing"] = curve.smoothing;
      out["total_capacity"] = curve.total_capacity;
      out["voltage"] = curve.voltage_bins;
      out["dqdv"] = curve.dqdv;
      out["peaks"] = peaks;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*gitt) {
      auto steps = analysis::Gitt(LoadDataset(gitt_in), gitt_cfg);
      if (gitt_csv) {
        std::string out;
        csv::AppendRow(out, std::vector<std::string>{"step", "start_time", "tau", "current", "delta_es", "delta_et", "diffusivity"});
        for (auto const& s : steps) {
          csv::AppendRow(out, std::vector<std::string>{std::to_string(s.step), text::FormatDouble(s.step_start_time),
                               text::FormatDouble(s.pulse_duration), text::FormatDouble(s.current),
                               text::FormatDouble(s.delta_es), text::FormatDouble(s.delta_et),
                               text::FormatDouble(s.diffusivity)});
        }
        std::cout << out;
        return 0;
      }
      Json out = Json::array();
      for (auto const& s : steps) {
        out.push_back(Json{{"step", s.step},
                           {"start_time", s.step_start_time},
                           {"tau", s.pulse_duration},
                           {"current", s.current},
                           {"delta_es", s.delta_es},
                           {"delta_et", s.delta_et},
                           {"diffusivity", s.diffusivity}});
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*convert) {
      auto conv = ConvertPath(conv_in);
      Json written = Json::array();
      for (auto const& d : conv.datasets) {
        fs::path dir = conv.datasets.size() == 1 ? fs::path(conv_out) : fs::path(conv_out) / ("ch" + std::to_string(d.channel));
        serialize::WriteDatasetDir(dir, d);
        written.push_back(Json{{"channel", d.channel}, {"points", d.points.size()}, {"dir", dir.string()}});
      }
      std::size_t malformed = conv.parse.unattributed.size();
      for (auto const& s : conv.parse.series) malformed += s.malformed.size();
      std::cout << Json{{"format_id", conv.format_id}, {"malformed_rows", malformed}, {"datasets", written}}.dump(2)
                << "\n";
      return 0;
    }

    if (*fsck) {
      auto report = OpenStore(data_dir)->Fsck();
      for (auto const& p : report.problems) std::cout << p << "\n";
      if (report.clean()) std::cout << "clean\n";
      return report.clean() ? 0 : 1;
    }

    if (*user_add) {
      auto u = OpenStore(data_dir)->AddUser(user_name, user_key);
      std::cout << store::UserToJson(u).dump(2) << "\n";
      return 0;
    }

    if (*sweep) {
      auto deleted = OpenStore(data_dir)->RetentionSweep(store::SystemNow(), sweep_days);
      Json out = Json::array();
      for (auto const& v : deleted) out.push_back(Json{{"project_id", v.project_id}, {"version", v.version}});
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (Error const& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (std::exception const& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
