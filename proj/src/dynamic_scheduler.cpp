#include "fedsched/dynamic_scheduler.hpp"

#include <algorithm>

#include "fedsched/errors.hpp"

namespace fedsched {

std::string_view to_string(RevocationPolicy p) {
  return p == RevocationPolicy::retain_type ? "retain_type" : "remove_type";
}

std::optional<RevocationPolicy> parse_revocation_policy(std::string_view text) {
  if (text == "remove_type" || text == "remove") return RevocationPolicy::remove_type;
  if (text == "retain_type" || text == "retain") return RevocationPolicy::retain_type;
  return std::nullopt;
}

CandidateSet CandidateSet::initial(const FlApplication& app, const MultiCloudEnv& env, const SlowdownTables& tables) {
  CandidateSet c;
  const auto& all = env.vm_addresses();
  c.sets_[Task::server()] = std::set<VmAddress>(all.begin(), all.end());
  for (const auto& client : app.clients) {
    auto& s = c.sets_[Task::client(client.id)];
    for (const auto& v : all)
      if (tables.find_exec(client.dataset_location, v)) s.insert(v);
  }
  return c;
}

const std::set<VmAddress>& CandidateSet::of(const Task& t) const {
  static const std::set<VmAddress> empty;
  auto it = sets_.find(t);
  return it == sets_.end() ? empty : it->second;
}

Assignment with_replacement(Assignment current, const Task& task, const VmAddress& vm) {
  if (task.is_server()) {
    current.server_vm = vm;
  } else {
    auto it = current.client_vm.find(task.client_id);
    if (it == current.client_vm.end()) throw Error("no client '" + task.client_id + "' in the current map");
    it->second = vm;
  }
  return current;
}

Micros recompute_makespan(const Task& task, const VmAddress& candidate, const Assignment& current_map,
                          const FlApplication& app, const SlowdownTables& tables, const MultiCloudEnv& env) {
  const VmAddress& server = task.is_server() ? candidate : current_map.server_vm;
  const Micros aggregation = env.vm(server).aggregation_time;
  Micros makespan{0};
  for (const auto& client : app.clients) {
    const bool moved = !task.is_server() && client.id == task.client_id;
    auto it = current_map.client_vm.find(client.id);
    if (!moved && it == current_map.client_vm.end()) throw Error("no client '" + client.id + "' in the current map");
    const VmAddress& vm = moved ? candidate : it->second;
    env.vm(vm);
    const Micros t = expected_exec_time(client, vm, tables) +
                     expected_comm_time(vm.region_key(), server.region_key(), app, tables) + aggregation;
    makespan = std::max(makespan, t);
  }
  return makespan;
}

Money recompute_cost(const Task& task, const VmAddress& candidate, Micros makespan, const Assignment& current_map,
                     const FlApplication& app, const MultiCloudEnv& env) {
  return total_costs(with_replacement(current_map, task, candidate), makespan, app, env).total;
}

std::vector<CandidateScore> score_candidates(const Task& task, const std::set<VmAddress>& candidates,
                                             const Assignment& current_map, const FlApplication& app,
                                             const SlowdownTables& tables, const MultiCloudEnv& env,
                                             const NormalizationConstants& norms, Ratio alpha) {
  std::vector<CandidateScore> out;
  out.reserve(candidates.size());
  for (const auto& vm : candidates) {
    CandidateScore s;
    s.vm = vm;
    s.makespan = recompute_makespan(task, vm, current_map, app, tables, env);
    s.cost = recompute_cost(task, vm, s.makespan, current_map, app, env);
    s.objective_numerator = objective_numerator(s.cost, s.makespan, norms, alpha);
    const long double a = static_cast<long double>(alpha.micro) / kMicro;
    s.objective = static_cast<double>(a * s.cost.ticks / norms.cost_max.ticks +
                                      (1 - a) * s.makespan.us / norms.t_max.us);
    out.push_back(std::move(s));
  }
  return out;
}

VmAddress select_replacement(const Task& task, CandidateSet& candidates, const VmAddress& revoked,
                             const Assignment& current_map, const FlApplication& app, const SlowdownTables& tables,
                             const MultiCloudEnv& env, const NormalizationConstants& norms, Ratio alpha,
                             RevocationPolicy policy) {
  if (policy == RevocationPolicy::remove_type) candidates.remove(task, revoked);
  const auto& pool = candidates.of(task);
  if (pool.empty()) throw UnrecoverableTask("no candidate VM left for " + task.to_string());
  const auto scores = score_candidates(task, pool, current_map, app, tables, env, norms, alpha);
  // Scores come in address order, so min_element keeps the smallest address on ties.
  const auto best = std::min_element(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.objective_numerator < b.objective_numerator;
  });
  return best->vm;
}

CandidateSet reallow_same_type(CandidateSet candidates, const Task& task, const VmAddress& revoked) {
  candidates.add(task, revoked);
  return candidates;
}

}  // namespace fedsched
