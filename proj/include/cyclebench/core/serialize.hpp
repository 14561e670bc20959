#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cyclebench/core/model.hpp"

namespace cyclebench::serialize {

using Json = nlohmann::ordered_json;

// Canonical points CSV: header row of DataPoint fields, empty cell for an
// absent value, doubles in shortest round-trip form.
std::string PointsToCsv(std::vector<DataPoint> const& points);
std::vector<DataPoint> PointsFromCsv(std::string_view text);

std::string ExtraToCsv(std::vector<ExtraDataValue> const& extra);
std::vector<ExtraDataValue> ExtraFromCsv(std::string_view text);

// channel, source_format, unit_provenance, source_names
Json MetaToJson(CanonicalDataset const& d);
void MetaFromJson(Json const& j, CanonicalDataset& d);

// Directory with `meta`, `points` and `extra` files.
void WriteDatasetDir(std::filesystem::path const& dir, CanonicalDataset const& d);
CanonicalDataset ReadDatasetDir(std::filesystem::path const& dir);

// Canonical byte form used for determinism comparisons.
std::string CanonicalBytes(CanonicalDataset const& d);

// Cycle row keyed exactly by the published Cycles columns.
Json CycleRow(CycleStats const& c, std::int64_t project_id);
// Superset of CycleRow that also keeps the per-cycle inputs of the rollup,
// so a stored row reads back into an identical CycleStats.
Json StoredCycleRow(CycleStats const& c, std::int64_t project_id);
CycleStats CycleFromStoredRow(Json const& j);

// Flat object keyed by the StatisticMetaData names; null where undefined.
Json RollupStatistics(StatisticRollup const& r);
Json RollupToJson(StatisticRollup const& r);
StatisticRollup RollupFromJson(Json const& j);

Json ProjectToJson(ProjectRecord const& p);
ProjectRecord ProjectFromJson(Json const& j);
Json TagToJson(ProjectTag const& t);
ProjectTag TagFromJson(Json const& j);

std::string ReadFile(std::filesystem::path const& p);
// Write to a sibling temp file then rename over the target.
void WriteFileAtomic(std::filesystem::path const& p, std::string_view bytes);

}  // namespace cyclebench::serialize
