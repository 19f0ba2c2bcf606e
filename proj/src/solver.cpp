// Exact solver. With the server fixed, every client's time and message cost
// depend only on its own VM, so for a candidate makespan t the round cost is
// server_price*t + sum over clients of (client_price*t + message cost). Each
// distinct per-client total time is tried as t; per t the clients pick their
// cheapest VM meeting t, falling back to branch and bound when that choice
// breaks a quota.

#include <algorithm>
#include <limits>

#include "dense_instance.hpp"
#include "fedsched/errors.hpp"
#include "fedsched/initial_mapping.hpp"

namespace fedsched {

namespace detail {
std::vector<ConstraintViolation> diagnose_infeasibility(const Problem& problem);
}

namespace {

using detail::DenseInstance;
using detail::UsageTracker;

struct Choice {
  std::size_t vm;
  Money weight;
};

// Minimizes the summed weight over per-client choices subject to quotas,
// ties broken by lexicographically smallest VM index vector. In first-fit
// mode the candidate lists are in index order and the first complete
// assignment within `cap` is returned, which is the lexicographic minimum.
class CappedSearch {
 public:
  CappedSearch(const std::vector<const std::vector<Choice>*>& lists, Money cap, bool first_fit, UsageTracker& usage)
      : lists_(lists), cap_(cap), first_fit_(first_fit), usage_(usage), cur_(lists.size()) {
    suffix_min_.assign(lists.size() + 1, Money{0});
    for (std::size_t k = lists.size(); k-- > 0;) {
      Money m = (*lists[k])[0].weight;
      for (const auto& c : *lists[k]) m = std::min(m, c.weight);
      suffix_min_[k] = suffix_min_[k + 1] + m;
    }
  }

  bool run() {
    if (suffix_min_[0] <= cap_) descend(0, Money{0});
    return found_;
  }

  const std::vector<std::size_t>& best() const { return best_; }
  std::int64_t nodes() const { return nodes_; }

 private:
  // Is cur_[0..k) followed by vm lexicographically greater than best_[0..k]?
  bool prefix_greater(std::size_t k, std::size_t vm) const {
    for (std::size_t i = 0; i < k; ++i)
      if (cur_[i] != best_[i]) return cur_[i] > best_[i];
    return vm > best_[k];
  }

  void descend(std::size_t k, Money partial) {
    ++nodes_;
    if (k == lists_.size()) {
      if (!found_ || partial < best_weight_ || (partial == best_weight_ && cur_ < best_)) {
        found_ = true;
        best_weight_ = partial;
        best_ = cur_;
      }
      if (first_fit_) stop_ = true;
      return;
    }
    for (const auto& c : *lists_[k]) {
      const Money bound_total = partial + c.weight + suffix_min_[k + 1];
      if (first_fit_) {
        if (bound_total > cap_) continue;
      } else {
        const Money bound = found_ ? best_weight_ : cap_;
        if (bound_total > bound) break;  // lists are sorted by weight
        if (found_ && bound_total == best_weight_ && prefix_greater(k, c.vm)) continue;
      }
      if (!usage_.try_add(c.vm)) continue;
      cur_[k] = c.vm;
      descend(k + 1, partial + c.weight);
      usage_.remove(c.vm);
      if (stop_) return;
    }
  }

  const std::vector<const std::vector<Choice>*>& lists_;
  Money cap_;
  bool first_fit_;
  UsageTracker& usage_;
  std::vector<std::size_t> cur_;
  std::vector<Money> suffix_min_;
  bool found_ = false;
  bool stop_ = false;
  Money best_weight_{0};
  std::vector<std::size_t> best_;
  std::int64_t nodes_ = 0;
};

struct Incumbent {
  bool found = false;
  i128 value = 0;
  std::size_t server = 0;
  std::vector<std::size_t> clients;

  bool improves(i128 v, std::size_t s, const std::vector<std::size_t>& c) const {
    if (!found || v < value) return true;
    if (v > value) return false;
    if (s != server) return s < server;
    return c < clients;
  }
};

SolveResult solve_exact(const Problem& problem) {
  const DenseInstance d(problem);
  const std::size_t n = d.n_clients(), nv = d.n_vms();
  const i128 a = d.alpha.micro;
  const i128 time_weight = mul_checked(kMicro - a, d.norms.cost_max.ticks);  // per microsecond of makespan
  const i128 cost_weight = mul_checked(a, d.norms.t_max.us);                 // per tick of cost
  const bool first_fit = a == 0;

  SolveResult result;
  Incumbent best;

  std::vector<std::vector<Micros>> tau(d.n_groups, std::vector<Micros>(nv));
  std::vector<std::vector<Choice>> lists(d.n_groups);
  std::vector<const std::vector<Choice>*> per_client(n);
  std::vector<std::size_t> pick(n);

  for (std::size_t s = 0; s < nv; ++s) {
    UsageTracker usage(d);
    if (!usage.try_add(s)) continue;

    // Per-group total time on every candidate VM with this server.
    std::vector<Micros> thresholds;
    Micros lower{0};
    for (std::size_t g = 0; g < d.n_groups; ++g) {
      Micros group_min{std::numeric_limits<std::int64_t>::max()};
      for (std::size_t v = 0; v < nv; ++v) {
        if (!d.is_candidate(g, v)) continue;
        tau[g][v] = d.group_exec[g][v] + d.comm_time[d.region_of[v]][d.region_of[s]] + d.aggregation[s];
        group_min = std::min(group_min, tau[g][v]);
        thresholds.push_back(tau[g][v]);
      }
      lower = std::max(lower, group_min);
    }
    if (n == 0) thresholds.push_back(d.aggregation[s]);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    for (const Micros t : thresholds) {
      if (t < lower) continue;
      if (t > d.deadline) break;
      const Money server_cost = charge(d.server_price[s], t);
      const i128 time_part = mul_checked(time_weight, t.us);
      // Both terms grow with t, so no later threshold can do better.
      if (best.found && mul_checked(cost_weight, server_cost.ticks) + time_part > best.value) break;
      if (best.found && first_fit && time_part >= best.value) break;

      Money cap = d.budget - server_cost;
      if (cap.ticks < 0) break;
      if (best.found && !first_fit) {
        const i128 room = (best.value - time_part) / cost_weight;
        cap = std::min(cap, Money{room} - server_cost);
        if (cap.ticks < 0) continue;
      }

      for (std::size_t g = 0; g < d.n_groups; ++g) {
        lists[g].clear();
        for (std::size_t v = 0; v < nv; ++v) {
          if (!d.is_candidate(g, v) || tau[g][v] > t) continue;
          lists[g].push_back({v, charge(d.client_price[v], t) + d.comm_cost[d.provider_of[v]][d.provider_of[s]]});
        }
        if (!first_fit)
          std::sort(lists[g].begin(), lists[g].end(), [](const Choice& x, const Choice& y) {
            return x.weight != y.weight ? x.weight < y.weight : x.vm < y.vm;
          });
      }

      Money relaxed{0};
      for (std::size_t k = 0; k < n; ++k) {
        per_client[k] = &lists[d.client_group[k]];
        relaxed += (*per_client[k])[0].weight;
      }

      bool have = false;
      if (!first_fit) {
        if (relaxed > cap) continue;
        have = true;
        std::size_t added = 0;
        for (; added < n; ++added) {
          pick[added] = (*per_client[added])[0].vm;
          if (!usage.try_add(pick[added])) {
            have = false;
            break;
          }
        }
        for (std::size_t k = 0; k < added; ++k) usage.remove(pick[k]);
      }
      if (!have) {
        CappedSearch search(per_client, cap, first_fit, usage);
        have = search.run();
        result.nodes += search.nodes();
        if (have) pick = search.best();
      }
      ++result.nodes;
      if (!have) continue;

      // Score at the true makespan of the chosen VMs, which may be below t.
      Micros makespan{0};
      Money cost{0};
      for (std::size_t k = 0; k < n; ++k) makespan = std::max(makespan, tau[d.client_group[k]][pick[k]]);
      if (n == 0) makespan = d.aggregation[s];
      cost = charge(d.server_price[s], makespan);
      for (std::size_t k = 0; k < n; ++k)
        cost += charge(d.client_price[pick[k]], makespan) + d.comm_cost[d.provider_of[pick[k]]][d.provider_of[s]];
      const i128 value = objective_numerator(cost, makespan, d.norms, d.alpha);
      if (best.improves(value, s, pick)) {
        best.found = true;
        best.value = value;
        best.server = s;
        best.clients = pick;
      }
    }
  }

  if (best.found)
    result.solution = evaluate_fixed(problem, d.to_assignment(best.server, best.clients, problem.pricing), d.norms);
  return result;
}

}  // namespace

namespace detail {

std::vector<ConstraintViolation> diagnose_infeasibility(const Problem& problem) {
  Problem open = problem;
  open.limits = RoundLimits{Money{std::numeric_limits<i128>::max() / 4},
                            Micros{std::numeric_limits<std::int64_t>::max() / 4}};
  open.enforce_quotas = false;

  Problem budget_only = open;
  budget_only.limits.budget_per_round = problem.limits.budget_per_round;
  budget_only.alpha = Ratio::one();
  if (!solve_exact(budget_only).solution)
    return {{ConstraintKind::budget, "no assignment fits the round budget of " +
                                         format_dollars(problem.limits.budget_per_round, 6)}};

  Problem deadline_only = open;
  deadline_only.limits.deadline_per_round = problem.limits.deadline_per_round;
  deadline_only.alpha = Ratio{0};
  if (!solve_exact(deadline_only).solution)
    return {{ConstraintKind::deadline, "no assignment finishes a round within " +
                                           format_seconds(problem.limits.deadline_per_round) + " s"}};

  if (problem.enforce_quotas) {
    Problem quotas_only = open;
    quotas_only.enforce_quotas = true;
    if (!solve_exact(quotas_only).solution) {
      // Report the quota classes broken by the unconstrained optimum.
      auto free = solve_exact(open);
      auto v = capacity_violations(problem.env, capacity_usage(problem.env, free.solution->assignment));
      if (!v.empty()) return {v.front()};
      return {{ConstraintKind::region_vcpu, "no assignment fits the capacity quotas"}};
    }
  }
  return {{ConstraintKind::budget, "budget, deadline and quotas cannot be met together"}};
}

}  // namespace detail

SolveResult solve(const Problem& problem) {
  auto r = solve_exact(problem);
  if (!r.solution) r.infeasibility = detail::diagnose_infeasibility(problem);
  return r;
}

}  // namespace fedsched
