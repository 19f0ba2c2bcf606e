#include "dense_instance.hpp"
#include "fedsched/errors.hpp"
#include "fedsched/initial_mapping.hpp"

namespace fedsched {

namespace detail {
std::vector<ConstraintViolation> diagnose_infeasibility(const Problem& problem);
}

SolveResult brute_force_solve(const Problem& problem, std::int64_t guard) {
  const detail::DenseInstance d(problem);
  const std::size_t n = d.n_clients(), nv = d.n_vms();

  std::vector<std::vector<std::size_t>> cands(n);
  i128 total = static_cast<i128>(nv);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t v = 0; v < nv; ++v)
      if (d.is_candidate(d.client_group[k], v)) cands[k].push_back(v);
    total *= static_cast<i128>(cands[k].size());
    if (total > guard) throw EnumerationGuardExceeded("more than " + std::to_string(guard) + " assignments");
  }

  SolveResult result;
  bool found = false;
  i128 best_n = 0;
  std::size_t best_server = 0;
  std::vector<std::size_t> best_clients;
  std::vector<std::size_t> pos(n, 0), pick(n);

  for (std::size_t s = 0; s < nv && total > 0; ++s) {
    std::fill(pos.begin(), pos.end(), 0);
    while (true) {
      ++result.nodes;
      Micros makespan{0};
      for (std::size_t k = 0; k < n; ++k) {
        pick[k] = cands[k][pos[k]];
        const Micros t = d.group_exec[d.client_group[k]][pick[k]] + d.comm_time[d.region_of[pick[k]]][d.region_of[s]];
        makespan = std::max(makespan, t);
      }
      makespan += d.aggregation[s];

      bool ok = makespan <= d.deadline;
      if (ok) {
        Money cost = charge(d.server_price[s], makespan);
        for (std::size_t k = 0; k < n; ++k)
          cost += charge(d.client_price[pick[k]], makespan) + d.comm_cost[d.provider_of[pick[k]]][d.provider_of[s]];
        ok = cost <= d.budget;
        if (ok) {
          detail::UsageTracker usage(d);
          ok = usage.try_add(s);
          for (std::size_t k = 0; ok && k < n; ++k) ok = usage.try_add(pick[k]);
        }
        if (ok) {
          const i128 value = objective_numerator(cost, makespan, d.norms, d.alpha);
          // Enumeration runs in key order, so the first minimum wins ties.
          if (!found || value < best_n) {
            found = true;
            best_n = value;
            best_server = s;
            best_clients = pick;
          }
        }
      }

      bool wrapped = true;
      for (std::size_t k = n; k-- > 0;) {
        if (++pos[k] < cands[k].size()) {
          wrapped = false;
          break;
        }
        pos[k] = 0;
      }
      if (wrapped) break;
    }
  }

  if (found) {
    result.solution = evaluate_fixed(problem, d.to_assignment(best_server, best_clients, problem.pricing), d.norms);
  } else {
    result.infeasibility = detail::diagnose_infeasibility(problem);
  }
  return result;
}

}  // namespace fedsched
