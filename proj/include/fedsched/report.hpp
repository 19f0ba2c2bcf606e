#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fedsched/bundle.hpp"
#include "fedsched/fault_sim.hpp"
#include "fedsched/initial_mapping.hpp"

namespace fedsched {

enum ExitCode : int { kExitOk = 0, kExitInfeasible = 2, kExitInvalid = 3, kExitParse = 4 };

struct BaselineDiff {
  std::string baseline;
  Difference diff;
};

struct ReportRow {
  std::string scenario;
  std::string setup;
  Micros time;
  Money cost;
  // On a baseline row: how much the optimal setup improves on it.
  std::vector<BaselineDiff> diffs;
};

struct NamedSolution {
  std::string name;
  SchedulingSolution solution;
};

struct MapReport {
  std::string scenario;
  std::optional<SchedulingSolution> optimal;
  std::vector<ConstraintViolation> infeasibility;
  std::vector<NamedSolution> baselines;
  std::vector<ReportRow> rows;
  std::int64_t nodes = 0;
};

// "server vm123, clients 4x vm121"
std::string describe_setup(const Assignment& a, const MultiCloudEnv& env);

// Solves the bundle and scores every fixed assignment with the same norms.
// Throws MissingSlowdown when a client has no usable VM.
MapReport cmd_map(const ScenarioBundle& bundle, std::optional<Ratio> alpha = {},
                  Pricing pricing = Pricing::on_demand);

std::string format_percent(double fraction);
std::string format_table(const std::vector<ReportRow>& rows);
// Inverse of format_table at the printed precision (seconds, cents, 0.01%).
std::vector<ReportRow> parse_table(std::string_view text);

// Line-oriented records with exact integer values.
inline constexpr int kSolutionFormatVersion = 1;

struct SolutionRecord {
  std::string name;
  std::string scenario;
  Assignment assignment;
  Micros makespan;
  CostBreakdown costs;
  NormalizationConstants norms;
  Ratio alpha;
  i128 objective_numerator = 0;
  std::vector<ConstraintViolation> violations;

  bool operator==(const SolutionRecord&) const = default;
};

SolutionRecord to_record(std::string name, std::string scenario, const SchedulingSolution& s);
std::vector<SolutionRecord> records_of(const MapReport& report);
std::string format_records(const std::vector<SolutionRecord>& records);
std::vector<SolutionRecord> parse_records(std::string_view text);

struct SimOverrides {
  std::vector<std::optional<Micros>> k_r_values;  // replaces the bundle grid when non-empty
  std::vector<SimScenario> scenarios;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
};

struct SimCell {
  SimScenario scenario;
  std::optional<Micros> k_r;
  SimConfig config;
  std::vector<TrialOutcome> trials;
  TrialSummary summary;  // over completed trials
  std::int64_t aborted = 0;
};

struct SimReport {
  std::string scenario;
  SchedulingSolution mapping;
  std::vector<SimCell> cells;
};

// Maps with on-demand prices, then runs the (scenario x k_r) grid.
SimReport cmd_simulate(const ScenarioBundle& bundle, const SimOverrides& overrides = {});

std::string format_sim_report(const SimReport& report);
// Every trial's log, each preceded by a "# scenario k_r trial" header.
std::string format_event_logs(const SimReport& report);

struct ValidationReport {
  int exit_code = kExitOk;
  std::vector<Violation> errors;
  std::vector<Violation> warnings;
};

ValidationReport cmd_validate(const std::filesystem::path& path);

// Reads "file#name" (name defaults to "optimal") from a records file.
SolutionRecord load_record(std::string_view ref);

}  // namespace fedsched
