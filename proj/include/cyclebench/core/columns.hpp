#pragma once

#include <array>
#include <string_view>

namespace cyclebench::columns {

// Header of the canonical points CSV, in DataPoint field order.
inline constexpr std::array<std::string_view, 13> kPointFields = {
    "index",       "time",       "wall_time",   "voltage",    "current",
    "capacity",    "energy",     "power",       "temperature", "resistance",
    "cycle_index", "step_index", "cycle_step",
};

// DataPoints table columns, verbatim and in published order.
inline constexpr std::array<std::string_view, 15> kDataPointColumns = {
    "Id",          "Capacity", "Current", "CycleIndex", "CycleStep",
    "Energy",      "Index",    "Power",   "ProjectId",  "Temperature",
    "Time",        "Voltage",  "StepIndex", "WallTime", "Resistance",
};

inline constexpr std::array<std::string_view, 4> kProjectTagColumns = {
    "Id", "ProjectId", "Name", "Value",
};

// Cycles table columns, verbatim and in published order.
inline constexpr std::array<std::string_view, 32> kCycleColumns = {
    "ProjectId",
    "Index",
    "ChargeCapacity",
    "ChargeCapacityRetention",
    "ChargeEnergy",
    "DischargeCapacity",
    "DischargeCapacityRetention",
    "DischargeEndCurrent",
    "DischargeEndVoltage",
    "DischargeEnergy",
    "DischargePower",
    "DischargeResistance",
    "EndCurrent",
    "EndRestVoltage",
    "EndVoltage",
    "FirstPointIndex",
    "MidVoltage",
    "PointCount",
    "Power",
    "ResistanceOhms",
    "StartChargeVoltage",
    "StartCurrent",
    "StartDischargeCurrent",
    "StartDischargeVoltage",
    "StatisticMetaData",
    "Temperature",
    "MinimumPower",
    "MaximumPower",
    "MinimumDischargePower",
    "MaximumDischargePower",
    "AverageDischargePower",
    "AveragePower",
};

// StatisticMetaData keys, verbatim and in published order.
inline constexpr std::array<std::string_view, 51> kRollupColumns = {
    "ChargeCapacityAverage",
    "ChargeCapacityFirst",
    "ChargeCapacityLast",
    "ChargeCapacityMax",
    "ChargeCapacityMin",
    "ChargeCapacityRetentionStdDev",
    "ChargeCapacityStdDev",
    "ChargeCapacityStdError",
    "ChargeCapacityVariance",
    "ChargeEnergyStdDev",
    "ChargeVoltageAverage",
    "ChargeVoltageMax",
    "ChargeVoltageMin",
    "ChargeVoltageStdDev",
    "ChargeVoltageStdError",
    "ChargeVoltageVariance",
    "CoulombicEfficiencyAverage",
    "CoulombicEfficiencyStdDev",
    "DischargeCapacityAverage",
    "DischargeCapacityFirst",
    "DischargeCapacityLast",
    "DischargeCapacityMax",
    "DischargeCapacityMin",
    "DischargeCapacityRetentionStdDev",
    "DischargeCapacityStdDev",
    "DischargeCapacityStdError",
    "DischargeCapacityVariance",
    "DischargeEndCurrentStdDev",
    "DischargeEndVoltageStdDev",
    "DischargeEnergyStdDev",
    "DischargePowerStdDev",
    "DischargeResistanceStdDev",
    "DischargeVoltageAverage",
    "DischargeVoltageMax",
    "DischargeVoltageMin",
    "DischargeVoltageStdDev",
    "DischargeVoltageStdError",
    "DischargeVoltageVariance",
    "EndCurrentStdDev",
    "EndVoltageStdDev",
    "MidVoltageStdDev",
    "PowerStdDev",
    "ResistanceOhmsStdDev",
    "VoltageAverage",
    "VoltageFirst",
    "VoltageLast",
    "VoltageMax",
    "VoltageMin",
    "VoltageStdDev",
    "VoltageStdError",
    "VoltageVariance",
};

}  // namespace cyclebench::columns
