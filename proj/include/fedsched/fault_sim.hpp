#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fedsched/dynamic_scheduler.hpp"
#include "fedsched/errors.hpp"
#include "fedsched/initial_mapping.hpp"

namespace fedsched {

enum class SimScenario { all_spot, server_on_demand_clients_spot, all_on_demand };

std::string_view to_string(SimScenario s);
std::optional<SimScenario> parse_scenario(std::string_view text);
PricingPlan pricing_for(SimScenario s);

struct SimConfig {
  std::optional<Micros> k_r;  // mean time between revocations per spot VM; nullopt disables them
  SimScenario scenario = SimScenario::all_spot;
  std::optional<std::int64_t> checkpoint_interval;  // rounds between server checkpoints; nullopt disables
  Micros checkpoint_save_time;
  Micros client_checkpoint_time;  // added to every round
  bool clients_keep_weights = true;
  Micros vm_prep_time;
  Ratio first_round_multiplier = Ratio::one();
  RevocationPolicy revocation_policy = RevocationPolicy::remove_type;
  std::uint64_t seed = 0;
  std::int64_t trials = 1;
};

std::vector<Violation> validate_sim_config(const SimConfig& cfg);

enum class SimEventKind { deploy, round_start, round_end, checkpoint, revocation, replacement, recovery_complete };

std::string_view to_string(SimEventKind k);
std::optional<SimEventKind> parse_event_kind(std::string_view text);

struct SimEvent {
  Micros time;
  SimEventKind kind;
  std::optional<Task> task;
  std::optional<VmAddress> vm;
  std::int64_t round = 0;  // round index for round/checkpoint events, recovery point for server recovery

  bool operator==(const SimEvent&) const = default;
};

struct RevocationCounts {
  std::int64_t server = 0;
  std::int64_t clients = 0;
  std::int64_t total() const { return server + clients; }
  bool operator==(const RevocationCounts&) const = default;
};

struct SimResult {
  RevocationCounts revocations;
  Micros total_time;
  Money total_cost;
  Money vm_cost;
  Money message_cost;
  std::int64_t rounds_completed = 0;
  std::int64_t rounds_re_executed = 0;
  Assignment final_map;
  std::vector<SimEvent> events;

  bool operator==(const SimResult&) const = default;
};

// Thrown when a task runs out of replacement candidates; carries the run so far.
struct SimulationAborted : UnrecoverableTask {
  SimulationAborted(const std::string& msg, SimResult partial_)
      : UnrecoverableTask(msg), partial(std::move(partial_)) {}
  SimResult partial;
};

// Generator for one task's revocation stream, derived from (seed, task).
std::mt19937_64 revocation_stream(std::uint64_t seed, const Task& task);

// One exponential inter-arrival with mean k_r, in whole microseconds.
Micros draw_interarrival(Micros k_r, std::mt19937_64& rng);

// Arrival times of a Poisson process with mean gap k_r, strictly below horizon.
std::vector<Micros> sample_revocation_times(Micros k_r, Micros horizon, std::mt19937_64& rng);

SimResult simulate(const SchedulingSolution& mapping, const FlApplication& app, const MultiCloudEnv& env,
                   const SlowdownTables& tables, const SimConfig& cfg);

// Trial i runs with a seed derived from (cfg.seed, i).
std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial);

struct TrialOutcome {
  std::optional<SimResult> result;
  std::string error;  // set when the trial aborted
};

std::vector<TrialOutcome> run_trials(const SchedulingSolution& mapping, const FlApplication& app,
                                     const MultiCloudEnv& env, const SlowdownTables& tables, const SimConfig& cfg);

struct Stat {
  double mean = 0.0;
  std::optional<double> sd;  // sample standard deviation, present with >= 2 values
};

struct TrialSummary {
  std::int64_t trials = 0;
  Stat revocations;
  Stat time_seconds;
  Stat cost_dollars;
};

TrialSummary aggregate_trials(const std::vector<SimResult>& results);

struct Difference {
  double time = 0.0;  // (v_baseline - v_candidate) / v_baseline
  double cost = 0.0;
};

Difference compare(const SchedulingSolution& candidate, const SchedulingSolution& baseline);
Difference compare(const SimResult& candidate, const SimResult& baseline);
Difference compare(Micros t_candidate, Money c_candidate, Micros t_baseline, Money c_baseline);

// Rebuilds the total cost from the event log alone: VM charges over each
// deploy/replacement..revocation/end interval plus message charges per
// completed round.
Money recompute_cost_from_log(const std::vector<SimEvent>& events, const FlApplication& app, const MultiCloudEnv& env,
                              PricingPlan pricing);

// One event per line: time_seconds kind task vm round.
std::string format_event(const SimEvent& e);
SimEvent parse_event(std::string_view line);

}  // namespace fedsched
