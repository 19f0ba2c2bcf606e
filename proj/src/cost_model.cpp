#include <algorithm>
#include <set>
#include <tuple>

#include "fedsched/errors.hpp"
#include "fedsched/initial_mapping.hpp"

namespace fedsched {

bool key_less(const Assignment& a, const Assignment& b) {
  if (a.server_vm != b.server_vm) return a.server_vm < b.server_vm;
  return std::lexicographical_compare(a.client_vm.begin(), a.client_vm.end(), b.client_vm.begin(), b.client_vm.end(),
                                      [](const auto& x, const auto& y) {
                                        return std::tie(x.first, x.second) < std::tie(y.first, y.second);
                                      });
}

CapacityUsage capacity_usage(const MultiCloudEnv& env, const Assignment& assignment) {
  CapacityUsage u;
  for (const auto& [id, addr] : assignment.client_vm) u.add(addr, env.vm(addr));
  u.add(assignment.server_vm, env.vm(assignment.server_vm));
  return u;
}

std::string_view to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::budget: return "budget";
    case ConstraintKind::deadline: return "deadline";
    case ConstraintKind::provider_gpu: return "provider-gpu-quota";
    case ConstraintKind::provider_vcpu: return "provider-vcpu-quota";
    case ConstraintKind::region_gpu: return "region-gpu-quota";
    case ConstraintKind::region_vcpu: return "region-vcpu-quota";
  }
  return "unknown";
}

Problem make_problem(const FlApplication& app, const MultiCloudEnv& env, const SlowdownTables& tables,
                     PricingPlan pricing) {
  return Problem{app, env, tables, round_limits(app), app.alpha, pricing};
}

Money comm_cost_pair(std::string_view client_provider, std::string_view server_provider,
                     const MessageProfile& messages, const MultiCloudEnv& env) {
  const auto& server_rate = env.provider(server_provider).transfer_cost;
  const auto& client_rate = env.provider(client_provider).transfer_cost;
  return transfer_charge(messages.server_train + messages.server_aggreg, server_rate) +
         transfer_charge(messages.client_train + messages.client_test, client_rate);
}

Money vm_costs(const Assignment& assignment, Micros makespan, const MultiCloudEnv& env) {
  Money sum = charge(price_of(env, assignment.server_vm, assignment.pricing.server), makespan);
  for (const auto& [id, addr] : assignment.client_vm)
    sum += charge(price_of(env, addr, assignment.pricing.clients), makespan);
  return sum;
}

namespace {

const VmAddress& vm_of(const Assignment& a, const std::string& client_id) {
  auto it = a.client_vm.find(client_id);
  if (it == a.client_vm.end()) throw Error("assignment has no VM for client '" + client_id + "'");
  return it->second;
}

}  // namespace

CostBreakdown total_costs(const Assignment& assignment, Micros makespan, const FlApplication& app,
                          const MultiCloudEnv& env) {
  CostBreakdown c;
  c.vm = vm_costs(assignment, makespan, env);
  for (const auto& client : app.clients)
    c.comm += comm_cost_pair(vm_of(assignment, client.id).provider, assignment.server_vm.provider, app.messages, env);
  c.total = c.vm + c.comm;
  return c;
}

MakespanBreakdown round_makespan(const Assignment& assignment, const FlApplication& app,
                                 const SlowdownTables& tables, const MultiCloudEnv& env) {
  MakespanBreakdown out;
  out.aggregation = env.vm(assignment.server_vm).aggregation_time;
  const RegionKey server_region = assignment.server_vm.region_key();
  for (const auto& client : app.clients) {
    const auto& vm = vm_of(assignment, client.id);
    env.vm(vm);
    ClientTiming t{expected_exec_time(client, vm, tables),
                   expected_comm_time(vm.region_key(), server_region, app, tables)};
    out.makespan = std::max(out.makespan, t.exec + t.comm + out.aggregation);
    out.per_client.emplace(client.id, t);
  }
  return out;
}

NormalizationConstants normalization(const FlApplication& app, const MultiCloudEnv& env,
                                     const SlowdownTables& tables, std::optional<Micros> deadline_per_round,
                                     PricingPlan pricing) {
  const auto& vms = env.vm_addresses();
  // Clients sharing dataset location and baseline behave identically.
  std::set<std::pair<RegionKey, Micros>> distinct;
  for (const auto& c : app.clients) distinct.emplace(c.dataset_location, c.baseline_total());

  Micros t_max{0};
  for (const auto& [loc, base] : distinct) {
    for (const auto& v : vms) {
      const auto sl = tables.find_exec(loc, v);
      if (!sl) continue;
      const Micros exec = scale(base, *sl);
      for (const auto& s : vms) {
        const Micros comm = expected_comm_time(v.region_key(), s.region_key(), app, tables);
        t_max = std::max(t_max, exec + comm + env.vm(s).aggregation_time);
      }
    }
  }
  if (deadline_per_round) t_max = std::min(t_max, *deadline_per_round);
  if (t_max.us <= 0) t_max = Micros{1};

  HourlyPrice max_price{0};
  for (const auto& v : vms)
    max_price = std::max({max_price, price_of(env, v, pricing.clients), price_of(env, v, pricing.server)});
  Money max_comm{0};
  for (const auto& j : env.providers())
    for (const auto& m : env.providers()) max_comm = std::max(max_comm, comm_cost_pair(j.id, m.id, app.messages, env));

  const auto n = static_cast<std::int64_t>(app.clients.size());
  Money cost_max = charge(max_price, t_max) * (n + 1) + max_comm * n;
  if (cost_max.ticks <= 0) cost_max = Money{1};
  return NormalizationConstants{t_max, cost_max};
}

i128 objective_numerator(Money cost, Micros makespan, const NormalizationConstants& norms, Ratio alpha) {
  return mul_checked(mul_checked(alpha.micro, cost.ticks), norms.t_max.us) +
         mul_checked(mul_checked(kMicro - alpha.micro, makespan.us), norms.cost_max.ticks);
}

double objective(const SchedulingSolution& s, const NormalizationConstants& norms, Ratio alpha) {
  const long double cost_term = static_cast<long double>(s.costs.total.ticks) / norms.cost_max.ticks;
  const long double time_term = static_cast<long double>(s.makespan.us) / norms.t_max.us;
  const long double a = static_cast<long double>(alpha.micro) / kMicro;
  return static_cast<double>(a * cost_term + (1 - a) * time_term);
}

std::vector<ConstraintViolation> capacity_violations(const MultiCloudEnv& env, const CapacityUsage& usage) {
  std::vector<ConstraintViolation> out;
  auto check = [&out](const Quota& q, std::int64_t used, ConstraintKind kind, const std::string& where) {
    if (!q.allows(used))
      out.push_back({kind, where + " uses " + std::to_string(used) + " of " + std::to_string(q.limit())});
  };
  for (const auto& [pid, t] : usage.per_provider) {
    const auto& p = env.provider(pid);
    check(p.gpu_quota, t.gpus, ConstraintKind::provider_gpu, pid);
    check(p.vcpu_quota, t.vcpus, ConstraintKind::provider_vcpu, pid);
  }
  for (const auto& [key, t] : usage.per_region) {
    const auto& r = env.region(key);
    check(r.gpu_quota, t.gpus, ConstraintKind::region_gpu, key.to_string());
    check(r.vcpu_quota, t.vcpus, ConstraintKind::region_vcpu, key.to_string());
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.kind < b.kind; });
  return out;
}

FeasibilityReport feasible(const Assignment& assignment, const FlApplication& app, const MultiCloudEnv& env,
                           const SlowdownTables& tables, const RoundLimits& limits) {
  FeasibilityReport r;
  const auto ms = round_makespan(assignment, app, tables, env);
  const auto cost = total_costs(assignment, ms.makespan, app, env);
  if (cost.total > limits.budget_per_round)
    r.violated.push_back({ConstraintKind::budget, "round cost " + format_dollars(cost.total, 6) + " exceeds " +
                                                      format_dollars(limits.budget_per_round, 6)});
  if (ms.makespan > limits.deadline_per_round)
    r.violated.push_back({ConstraintKind::deadline, "makespan " + format_seconds(ms.makespan) + " s exceeds " +
                                                        format_seconds(limits.deadline_per_round) + " s"});
  for (auto& v : capacity_violations(env, capacity_usage(env, assignment))) r.violated.push_back(std::move(v));
  r.ok = r.violated.empty();
  return r;
}

SchedulingSolution evaluate_fixed(const Problem& problem, const Assignment& assignment,
                                  std::optional<NormalizationConstants> norms) {
  SchedulingSolution s;
  s.assignment = assignment;
  const auto ms = round_makespan(assignment, problem.app, problem.tables, problem.env);
  s.makespan = ms.makespan;
  s.per_client = ms.per_client;
  s.costs = total_costs(assignment, s.makespan, problem.app, problem.env);
  s.norms = norms ? *norms
                  : normalization(problem.app, problem.env, problem.tables, problem.limits.deadline_per_round,
                                  problem.pricing);
  s.alpha = problem.alpha;
  s.objective_numerator = objective_numerator(s.costs.total, s.makespan, s.norms, s.alpha);
  s.objective = objective(s, s.norms, s.alpha);
  auto report = feasible(assignment, problem.app, problem.env, problem.tables, problem.limits);
  if (!problem.enforce_quotas)
    std::erase_if(report.violated, [](const auto& v) { return v.kind > ConstraintKind::deadline; });
  s.violations = std::move(report.violated);
  return s;
}

Assignment uniform_assignment(const FlApplication& app, const VmAddress& client_vm, const VmAddress& server_vm,
                              PricingPlan pricing) {
  Assignment a;
  for (const auto& c : app.clients) a.client_vm.emplace(c.id, client_vm);
  a.server_vm = server_vm;
  a.pricing = pricing;
  return a;
}

}  // namespace fedsched
