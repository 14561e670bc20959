#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cyclebench {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using OptDouble = std::optional<double>;

// One canonical time-series sample. Units: s, V, A, Ah, Wh, W, degC, ohm.
// Current is signed: charge > 0, discharge < 0. Capacity and energy
// accumulate from zero at each half-cycle boundary.
struct DataPoint {
  std::int64_t index = 0;
  double time = 0.0;
  std::optional<Timestamp> wall_time;
  double voltage = 0.0;
  double current = 0.0;
  OptDouble capacity;
  OptDouble energy;
  OptDouble power;
  OptDouble temperature;
  OptDouble resistance;
  std::optional<std::int64_t> cycle_index;  // 1-based
  std::optional<std::int64_t> step_index;   // program step
  std::optional<std::int64_t> cycle_step;   // step ordinal within the cycle

  friend bool operator==(DataPoint const&, DataPoint const&) = default;
};

// Auxiliary channel value. Stored only where the value differs from the
// previous stored value for the same name.
struct ExtraDataValue {
  std::int64_t point_index = 0;
  std::string name;
  std::string value;

  friend bool operator==(ExtraDataValue const&, ExtraDataValue const&) =
      default;
};

struct CanonicalDataset {
  std::vector<DataPoint> points;
  std::vector<ExtraDataValue> extra;
  std::int64_t channel = 1;
  std::string source_format;
  std::map<std::string, std::string> unit_provenance;  // field -> source unit
  std::vector<std::string> source_names;

  friend bool operator==(CanonicalDataset const&, CanonicalDataset const&) =
      default;
};

struct CycleStats {
  std::int64_t cycle_index = 1;
  double charge_capacity = 0.0;
  double discharge_capacity = 0.0;
  double charge_energy = 0.0;
  double discharge_energy = 0.0;
  OptDouble charge_capacity_retention;
  OptDouble discharge_capacity_retention;
  OptDouble coulombic_efficiency;
  OptDouble mid_voltage;
  OptDouble end_voltage;
  OptDouble end_rest_voltage;
  OptDouble discharge_end_voltage;
  OptDouble start_charge_voltage;
  OptDouble start_discharge_voltage;
  OptDouble start_current;
  OptDouble end_current;
  OptDouble discharge_end_current;
  OptDouble start_discharge_current;
  OptDouble power;            // mean V*I over the whole cycle
  OptDouble discharge_power;  // mean V*I over the discharge span
  OptDouble minimum_power;
  OptDouble maximum_power;
  OptDouble average_power;    // mean V*I over non-rest samples
  OptDouble minimum_discharge_power;
  OptDouble maximum_discharge_power;
  OptDouble average_discharge_power;
  OptDouble resistance_ohms;
  OptDouble discharge_resistance;
  OptDouble temperature;
  std::int64_t first_point_index = 0;
  std::int64_t point_count = 0;
  // Per-cycle mean voltages; inputs to the cross-cycle voltage statistics.
  OptDouble charge_voltage;
  OptDouble discharge_voltage;
  OptDouble voltage;
  // Rollup over cycles 1..this one, as JSON text.
  std::string statistic_metadata;

  friend bool operator==(CycleStats const&, CycleStats const&) = default;
};

struct RollupEntry {
  std::string name;
  OptDouble value;

  friend bool operator==(RollupEntry const&, RollupEntry const&) = default;
};

struct StatisticRollup {
  std::size_t cycle_count = 0;
  std::vector<RollupEntry> entries;  // fixed column order
  // Quantities that had exactly one sample; their spread statistics are 0
  // by convention rather than undefined.
  std::vector<std::string> single_sample;

  OptDouble get(std::string_view name) const;

  friend bool operator==(StatisticRollup const&, StatisticRollup const&) =
      default;
};

enum class ProjectStatus { kPending, kProcessing, kReady, kFailed };

std::string_view ProjectStatusName(ProjectStatus s);
ProjectStatus ParseProjectStatus(std::string_view s);

struct ProjectRecord {
  std::int64_t id = 0;
  std::string name;
  std::string file_name;
  std::string internal_file_name;
  std::int64_t file_size = 0;
  std::int64_t channel = 0;
  std::int64_t num_cycles = 0;
  std::string test_name;
  std::string test_type;
  std::string comments;
  std::string tag;
  OptDouble mass;
  OptDouble pam_mass;
  OptDouble nam_mass;
  OptDouble area;
  OptDouble active_material_fraction;
  OptDouble theoretical_capacity;
  ProjectStatus status = ProjectStatus::kPending;
  std::string error;
  std::string error_detailed;
  std::string processing_message;
  std::optional<Timestamp> created_at;
  std::optional<Timestamp> updated_at;
  std::optional<Timestamp> test_date;
  std::optional<Timestamp> process_date;
  std::int64_t shard_id = 0;
  std::optional<std::int64_t> organization_id;
  std::int64_t user_id = 0;
  std::optional<std::vector<std::int64_t>> stitched_from;
  std::vector<std::string> stitched_from_names;
  bool is_real_time = false;
  std::optional<std::int64_t> job_id;
  // Columns carried verbatim without interpretation.
  std::map<std::string, std::string> opaque;

  friend bool operator==(ProjectRecord const&, ProjectRecord const&) = default;
};

struct ProjectTag {
  std::int64_t id = 0;
  std::int64_t project_id = 0;
  std::string name;
  std::string value;

  friend bool operator==(ProjectTag const&, ProjectTag const&) = default;
};

enum class ViolationKind {
  kEmptyDataset,
  kMonotoneIndex,
  kMonotoneTime,
  kMonotoneCycle,
  kPositiveVoltage,
  kPowerMismatch,
  kNegativeAccumulation,
  kNonFinite,
  kExtraDelta,
};

std::string_view ViolationKindName(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::size_t position = 0;  // position in the points vector
  std::string field;

  friend bool operator==(Violation const&, Violation const&) = default;
};

// Every invariant violation in the dataset, in point order. Empty for valid
// data.
std::vector<Violation> ValidateDataset(CanonicalDataset const& d);

}  // namespace cyclebench
