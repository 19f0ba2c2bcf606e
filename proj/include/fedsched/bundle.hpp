#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedsched/app_model.hpp"
#include "fedsched/assignment.hpp"
#include "fedsched/cloud_model.hpp"
#include "fedsched/errors.hpp"
#include "fedsched/fault_sim.hpp"
#include "fedsched/pre_scheduling.hpp"

namespace fedsched {

inline constexpr int kBundleFormatVersion = 1;

struct NamedAssignment {
  std::string name;
  Assignment assignment;
};

// Simulation settings plus the (k_r, scenario) grid to sweep.
struct SimGrid {
  SimConfig base;
  std::vector<std::optional<Micros>> k_r_values;  // nullopt = revocations disabled
  std::vector<SimScenario> scenarios;
};

struct ScenarioBundle {
  std::string name;
  MultiCloudEnv env;
  FlApplication app;
  SlowdownTables tables;
  std::vector<ExecMeasurementSet> exec_measurements;
  std::optional<CommMeasurementSet> comm_measurements;
  std::vector<NamedAssignment> fixed_assignments;
  std::optional<SimGrid> sim;
  // Non-fatal findings (unmeasured VMs, table/raw mismatches).
  std::vector<Violation> warnings;
};

// Raised by load_bundle when the file parses but fails validation.
struct BundleInvalid : Error {
  explicit BundleInvalid(std::vector<Violation> v);
  std::vector<Violation> violations;
};

ScenarioBundle parse_bundle(std::string_view text);
ScenarioBundle load_bundle(const std::filesystem::path& path);

// Every validation finding for an already-built bundle.
std::vector<Violation> validate_bundle(const ScenarioBundle& b);

// Canonical JSON text; parse_bundle(serialize_bundle(b)) rebuilds an equivalent bundle.
std::string serialize_bundle(const ScenarioBundle& b);
void save_bundle(const ScenarioBundle& b, const std::filesystem::path& path);

}  // namespace fedsched
