#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedsched/initial_mapping.hpp"

namespace fedsched {

struct Task {
  enum class Kind { server, client };
  Kind kind = Kind::server;
  std::string client_id;

  static Task server() { return {}; }
  static Task client(std::string id) { return {Kind::client, std::move(id)}; }
  bool is_server() const { return kind == Kind::server; }
  std::string to_string() const { return is_server() ? "server" : "client:" + client_id; }
  auto operator<=>(const Task&) const = default;
};

enum class RevocationPolicy { remove_type, retain_type };

std::string_view to_string(RevocationPolicy p);
std::optional<RevocationPolicy> parse_revocation_policy(std::string_view text);

// Admissible VMs per task. Removals are per task; other tasks keep the VM.
class CandidateSet {
 public:
  // Server: every VM. Client: every VM with an execution slowdown for its dataset.
  static CandidateSet initial(const FlApplication& app, const MultiCloudEnv& env, const SlowdownTables& tables);

  const std::set<VmAddress>& of(const Task& t) const;
  void set(const Task& t, std::set<VmAddress> vms) { sets_[t] = std::move(vms); }
  void remove(const Task& t, const VmAddress& vm) { sets_[t].erase(vm); }
  void add(const Task& t, const VmAddress& vm) { sets_[t].insert(vm); }
  bool operator==(const CandidateSet&) const = default;

 private:
  std::map<Task, std::set<VmAddress>> sets_;
};

Assignment with_replacement(Assignment current, const Task& task, const VmAddress& vm);

// Round makespan if `task` moved to `candidate` and every other task stayed put.
Micros recompute_makespan(const Task& task, const VmAddress& candidate, const Assignment& current_map,
                          const FlApplication& app, const SlowdownTables& tables, const MultiCloudEnv& env);

// Round cost of the same hypothetical map at the given makespan.
Money recompute_cost(const Task& task, const VmAddress& candidate, Micros makespan, const Assignment& current_map,
                     const FlApplication& app, const MultiCloudEnv& env);

struct CandidateScore {
  VmAddress vm;
  Micros makespan;
  Money cost;
  i128 objective_numerator = 0;
  double objective = 0.0;
};

// Scores every VM in `candidates` for `task`, in address order.
std::vector<CandidateScore> score_candidates(const Task& task, const std::set<VmAddress>& candidates,
                                             const Assignment& current_map, const FlApplication& app,
                                             const SlowdownTables& tables, const MultiCloudEnv& env,
                                             const NormalizationConstants& norms, Ratio alpha);

// Under remove_type the revoked VM leaves the task's set for good; then the
// best-scoring remaining candidate is returned (ties to the smaller address).
// Throws UnrecoverableTask when nothing is left.
VmAddress select_replacement(const Task& task, CandidateSet& candidates, const VmAddress& revoked,
                             const Assignment& current_map, const FlApplication& app, const SlowdownTables& tables,
                             const MultiCloudEnv& env, const NormalizationConstants& norms, Ratio alpha,
                             RevocationPolicy policy = RevocationPolicy::remove_type);

// Copy of `candidates` with `revoked` admissible again for `task`.
CandidateSet reallow_same_type(CandidateSet candidates, const Task& task, const VmAddress& revoked);

}  // namespace fedsched
