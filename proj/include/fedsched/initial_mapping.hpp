#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedsched/app_model.hpp"
#include "fedsched/assignment.hpp"
#include "fedsched/pre_scheduling.hpp"

namespace fedsched {

struct NormalizationConstants {
  Micros t_max;
  Money cost_max;
  bool operator==(const NormalizationConstants&) const = default;
};

struct ClientTiming {
  Micros exec;
  Micros comm;
  bool operator==(const ClientTiming&) const = default;
};

struct CostBreakdown {
  Money vm;
  Money comm;
  Money total;
  bool operator==(const CostBreakdown&) const = default;
};

struct MakespanBreakdown {
  Micros makespan;
  Micros aggregation;
  std::map<std::string, ClientTiming> per_client;
};

// Listed in reporting priority order.
enum class ConstraintKind { budget, deadline, provider_gpu, provider_vcpu, region_gpu, region_vcpu };

std::string_view to_string(ConstraintKind k);

struct ConstraintViolation {
  ConstraintKind kind;
  std::string detail;
  bool operator==(const ConstraintViolation&) const = default;
};

struct SchedulingSolution {
  Assignment assignment;
  Micros makespan;
  CostBreakdown costs;
  std::map<std::string, ClientTiming> per_client;
  NormalizationConstants norms;
  Ratio alpha;
  double objective = 0.0;
  // alpha*cost*T_max + (1-alpha)*t_m*cost_max in (micro, tick, microsecond)
  // units; comparable between solutions that share norms and alpha.
  i128 objective_numerator = 0;
  // Empty when the assignment satisfies every round constraint.
  std::vector<ConstraintViolation> violations;
};

struct Problem {
  const FlApplication& app;
  const MultiCloudEnv& env;
  const SlowdownTables& tables;
  RoundLimits limits;
  Ratio alpha;
  PricingPlan pricing;
  bool enforce_quotas = true;
};

// Problem with the app's own alpha and per-round limits.
Problem make_problem(const FlApplication& app, const MultiCloudEnv& env, const SlowdownTables& tables,
                     PricingPlan pricing = {});

Money comm_cost_pair(std::string_view client_provider, std::string_view server_provider,
                     const MessageProfile& messages, const MultiCloudEnv& env);

Money vm_costs(const Assignment& assignment, Micros makespan, const MultiCloudEnv& env);

CostBreakdown total_costs(const Assignment& assignment, Micros makespan, const FlApplication& app,
                          const MultiCloudEnv& env);

MakespanBreakdown round_makespan(const Assignment& assignment, const FlApplication& app,
                                 const SlowdownTables& tables, const MultiCloudEnv& env);

// T_max is the slowest (client, client VM, server VM) combination, clamped to
// the per-round deadline when one is given. Only VMs with an execution
// slowdown for a client's dataset are considered for that client.
NormalizationConstants normalization(const FlApplication& app, const MultiCloudEnv& env,
                                     const SlowdownTables& tables, std::optional<Micros> deadline_per_round = {},
                                     PricingPlan pricing = {});

i128 objective_numerator(Money cost, Micros makespan, const NormalizationConstants& norms, Ratio alpha);
double objective(const SchedulingSolution& s, const NormalizationConstants& norms, Ratio alpha);

std::vector<ConstraintViolation> capacity_violations(const MultiCloudEnv& env, const CapacityUsage& usage);

struct FeasibilityReport {
  bool ok = true;
  std::vector<ConstraintViolation> violated;
};

FeasibilityReport feasible(const Assignment& assignment, const FlApplication& app, const MultiCloudEnv& env,
                           const SlowdownTables& tables, const RoundLimits& limits);

struct SolveResult {
  std::optional<SchedulingSolution> solution;
  // When infeasible: the first constraint class that cannot be met.
  std::vector<ConstraintViolation> infeasibility;
  std::int64_t nodes = 0;
};

// Exact minimizer of the weighted objective; ties go to the smallest
// assignment under key_less.
SolveResult solve(const Problem& problem);

inline constexpr std::int64_t kBruteForceGuard = 10'000'000;

// Exhaustive enumeration; throws EnumerationGuardExceeded past `guard` assignments.
SolveResult brute_force_solve(const Problem& problem, std::int64_t guard = kBruteForceGuard);

// Scores a given assignment. Norms default to normalization() of the problem.
SchedulingSolution evaluate_fixed(const Problem& problem, const Assignment& assignment,
                                  std::optional<NormalizationConstants> norms = {});

// Assignment that puts every client on `client_vm` and the server on `server_vm`.
Assignment uniform_assignment(const FlApplication& app, const VmAddress& client_vm, const VmAddress& server_vm,
                              PricingPlan pricing = {});

}  // namespace fedsched
