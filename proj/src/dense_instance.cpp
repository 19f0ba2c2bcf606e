#include "dense_instance.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "fedsched/errors.hpp"

namespace fedsched::detail {

DenseInstance::DenseInstance(const Problem& p)
    : budget(p.limits.budget_per_round),
      deadline(p.limits.deadline_per_round),
      alpha(p.alpha),
      enforce_quotas(p.enforce_quotas) {
  const auto& env = p.env;
  vms = env.vm_addresses();
  std::sort(vms.begin(), vms.end());
  if (vms.empty()) throw Error("empty VM catalog");

  std::map<std::string, std::size_t> provider_idx;
  std::map<RegionKey, std::size_t> region_idx;
  std::vector<RegionKey> regions;
  for (const auto& prov : env.providers()) {
    if (provider_idx.emplace(prov.id, provider_gpu.size()).second) {
      provider_gpu.push_back(prov.gpu_quota);
      provider_vcpu.push_back(prov.vcpu_quota);
    }
    for (const auto& reg : prov.regions) {
      RegionKey key{prov.id, reg.id};
      if (region_idx.emplace(key, regions.size()).second) {
        regions.push_back(key);
        region_gpu.push_back(reg.gpu_quota);
        region_vcpu.push_back(reg.vcpu_quota);
      }
    }
  }

  for (const auto& a : vms) {
    const auto& spec = env.vm(a);
    provider_of.push_back(provider_idx.at(a.provider));
    region_of.push_back(region_idx.at(a.region_key()));
    vcpus.push_back(spec.vcpus);
    gpus.push_back(spec.gpus);
    client_price.push_back(price_of(env, a, p.pricing.clients));
    server_price.push_back(price_of(env, a, p.pricing.server));
    aggregation.push_back(spec.aggregation_time);
  }

  const auto& clients = p.app.clients;
  client_index.resize(clients.size());
  std::iota(client_index.begin(), client_index.end(), std::size_t{0});
  std::sort(client_index.begin(), client_index.end(),
            [&](std::size_t a, std::size_t b) { return clients[a].id < clients[b].id; });
  std::map<std::pair<RegionKey, Micros>, std::size_t> groups;
  std::vector<bool> region_needed(regions.size(), false);
  for (std::size_t i : client_index) {
    const auto& c = clients[i];
    client_ids.push_back(c.id);
    auto [it, fresh] = groups.emplace(std::pair{c.dataset_location, c.baseline_total()}, group_exec.size());
    if (fresh) {
      std::vector<Micros> row(vms.size(), Micros{-1});
      for (std::size_t v = 0; v < vms.size(); ++v) {
        if (auto sl = p.tables.find_exec(c.dataset_location, vms[v])) {
          row[v] = scale(c.baseline_total(), *sl);
          region_needed[region_of[v]] = true;
        }
      }
      if (std::none_of(row.begin(), row.end(), [](Micros t) { return t.us >= 0; }))
        throw MissingSlowdown("client '" + c.id + "' has no VM with an execution slowdown for dataset in " +
                              c.dataset_location.to_string());
      group_exec.push_back(std::move(row));
    }
    client_group.push_back(it->second);
  }
  n_groups = group_exec.size();

  comm_time.assign(regions.size(), std::vector<Micros>(regions.size(), Micros{-1}));
  for (std::size_t a = 0; a < regions.size(); ++a) {
    for (std::size_t b = 0; b < regions.size(); ++b) {
      if (auto sl = p.tables.find_comm(regions[a], regions[b])) {
        comm_time[a][b] = scale(p.app.baseline_comm_time, *sl);
      } else if (region_needed[a] || region_needed[b]) {
        p.tables.comm(regions[a], regions[b]);  // throws MissingSlowdown
      }
    }
  }

  comm_cost.assign(provider_gpu.size(), std::vector<Money>(provider_gpu.size()));
  for (const auto& [j, jdx] : provider_idx)
    for (const auto& [m, mdx] : provider_idx) comm_cost[jdx][mdx] = comm_cost_pair(j, m, p.app.messages, env);

  norms = normalization(p.app, env, p.tables, deadline, p.pricing);
}

Assignment DenseInstance::to_assignment(std::size_t server, const std::vector<std::size_t>& client_vms,
                                        PricingPlan pricing) const {
  Assignment a;
  a.server_vm = vms[server];
  a.pricing = pricing;
  for (std::size_t k = 0; k < client_ids.size(); ++k) a.client_vm.emplace(client_ids[k], vms[client_vms[k]]);
  return a;
}

UsageTracker::UsageTracker(const DenseInstance& d)
    : d_(d),
      pg_(d.provider_gpu.size()),
      pc_(d.provider_gpu.size()),
      rg_(d.region_gpu.size()),
      rc_(d.region_gpu.size()) {}

bool UsageTracker::try_add(std::size_t vm) {
  const std::size_t p = d_.provider_of[vm], r = d_.region_of[vm];
  pg_[p] += d_.gpus[vm];
  pc_[p] += d_.vcpus[vm];
  rg_[r] += d_.gpus[vm];
  rc_[r] += d_.vcpus[vm];
  if (!d_.enforce_quotas) return true;
  if (d_.provider_gpu[p].allows(pg_[p]) && d_.provider_vcpu[p].allows(pc_[p]) && d_.region_gpu[r].allows(rg_[r]) &&
      d_.region_vcpu[r].allows(rc_[r]))
    return true;
  remove(vm);
  return false;
}

void UsageTracker::remove(std::size_t vm) {
  const std::size_t p = d_.provider_of[vm], r = d_.region_of[vm];
  pg_[p] -= d_.gpus[vm];
  pc_[p] -= d_.vcpus[vm];
  rg_[r] -= d_.gpus[vm];
  rc_[r] -= d_.vcpus[vm];
}

}  // namespace fedsched::detail
