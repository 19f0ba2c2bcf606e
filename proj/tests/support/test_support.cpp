#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace fedsched::testkit {

std::string fixture_path(const std::string& name) { return std::string(FEDSCHED_FIXTURE_DIR) + "/" + name + ".scenario"; }

const ScenarioBundle& fixture(const std::string& name) {
  static std::map<std::string, ScenarioBundle> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, load_bundle(fixture_path(name))).first;
  return it->second;
}

double ref_exec_slowdown(const SlowdownTables& t, const RegionKey& dataset, const VmAddress& vm) {
  for (const auto& [key, sl] : t.exec_entries())
    if (key.first && *key.first == dataset && key.second == vm) return sl.micro / 1e6;
  for (const auto& [key, sl] : t.exec_entries())
    if (!key.first && key.second == vm) return sl.micro / 1e6;
  throw std::runtime_error("reference: no exec slowdown for " + vm.to_string());
}

double ref_comm_slowdown(const SlowdownTables& t, const RegionKey& a, const RegionKey& b) {
  for (const auto& [pair, sl] : t.comm_entries())
    if ((pair.first == a && pair.second == b) || (pair.first == b && pair.second == a)) return sl.micro / 1e6;
  throw std::runtime_error("reference: no comm slowdown for " + a.to_string() + " / " + b.to_string());
}

double ref_price_per_hour(const MultiCloudEnv& env, const VmAddress& vm, Pricing p) {
  const auto& spec = env.vm(vm);
  if (p == Pricing::on_demand) return spec.on_demand.micro_per_hour / 1e6;
  if (spec.spot) return spec.spot->micro_per_hour / 1e6;
  return 0.3 * spec.on_demand.micro_per_hour / 1e6;
}

RefRound ref_round(const ScenarioBundle& b, const Assignment& a) {
  RefRound r;
  const auto& server = a.server_vm;
  const double aggregation = b.env.vm(server).aggregation_time.us / 1e6;
  const double comm_bl = b.app.baseline_comm_time.us / 1e6;
  for (const auto& c : b.app.clients) {
    const auto& vm = a.client_vm.at(c.id);
    const double exec = (c.baseline_train.us + c.baseline_test.us) / 1e6 * ref_exec_slowdown(b.tables, c.dataset_location, vm);
    const double comm = comm_bl * ref_comm_slowdown(b.tables, vm.region_key(), server.region_key());
    r.makespan_s = std::max(r.makespan_s, exec + comm + aggregation);
  }
  double price_sum = ref_price_per_hour(b.env, server, a.pricing.server);
  for (const auto& [id, vm] : a.client_vm) price_sum += ref_price_per_hour(b.env, vm, a.pricing.clients);
  r.vm_cost = price_sum * r.makespan_s / 3600.0;
  const auto& m = b.app.messages;
  const double server_rate = b.env.provider(server.provider).transfer_cost.micro_per_gb / 1e6;
  for (const auto& [id, vm] : a.client_vm) {
    const double client_rate = b.env.provider(vm.provider).transfer_cost.micro_per_gb / 1e6;
    r.comm_cost += (m.server_train.n + m.server_aggreg.n) / 1e9 * server_rate +
                   (m.client_train.n + m.client_test.n) / 1e9 * client_rate;
  }
  return r;
}

namespace {

Quota random_quota(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, bool finite) {
  if (!finite || std::uniform_int_distribution<int>(0, 3)(rng) == 0) return Quota::unbounded();
  return Quota::of(std::uniform_int_distribution<std::int64_t>(lo, hi)(rng));
}

}  // namespace

std::unique_ptr<Instance> random_instance(std::uint64_t seed, const RandomInstanceOptions& opt) {
  std::mt19937_64 rng(seed);
  auto uni = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };

  const int n_vms = static_cast<int>(uni(2, opt.max_vm_types));
  const int n_providers = static_cast<int>(uni(1, 2));
  std::vector<ProviderSpec> providers(n_providers);
  for (int p = 0; p < n_providers; ++p) {
    providers[p].id = "p" + std::to_string(p);
    providers[p].transfer_cost = TransferRate{uni(0, 200'000)};
    providers[p].gpu_quota = random_quota(rng, 0, 6, opt.finite_quotas);
    providers[p].vcpu_quota = random_quota(rng, 4, 60, opt.finite_quotas);
    const int n_regions = static_cast<int>(uni(1, 2));
    for (int r = 0; r < n_regions; ++r) {
      RegionSpec region;
      region.id = "r" + std::to_string(r);
      region.gpu_quota = random_quota(rng, 0, 6, opt.finite_quotas);
      region.vcpu_quota = random_quota(rng, 4, 60, opt.finite_quotas);
      providers[p].regions.push_back(region);
    }
  }
  for (int v = 0; v < n_vms; ++v) {
    auto& p = providers[uni(0, n_providers - 1)];
    auto& region = p.regions[uni(0, static_cast<std::int64_t>(p.regions.size()) - 1)];
    VmTypeSpec vm;
    vm.id = "v" + std::to_string(v);
    vm.vcpus = uni(1, 16);
    vm.gpus = uni(0, 2);
    vm.on_demand = HourlyPrice{uni(50'000, 3'000'000)};
    vm.aggregation_time = Micros{uni(0, 2'000'000)};
    region.vm_types.push_back(vm);
  }
  // Drop regions that received no VM.
  for (auto& p : providers)
    p.regions.erase(std::remove_if(p.regions.begin(), p.regions.end(), [](const auto& r) { return r.vm_types.empty(); }),
                    p.regions.end());
  providers.erase(std::remove_if(providers.begin(), providers.end(), [](const auto& p) { return p.regions.empty(); }),
                  providers.end());

  auto inst = std::make_unique<Instance>();
  inst->env = MultiCloudEnv(providers);
  const auto& vms = inst->env.vm_addresses();

  std::vector<RegionKey> regions;
  for (const auto& v : vms)
    if (std::find(regions.begin(), regions.end(), v.region_key()) == regions.end()) regions.push_back(v.region_key());

  const int n_clients = static_cast<int>(uni(1, opt.max_clients));
  for (int c = 0; c < n_clients; ++c) {
    ClientSpec cs;
    cs.id = "c" + std::to_string(c);
    cs.dataset_location = regions[uni(0, static_cast<std::int64_t>(regions.size()) - 1)];
    cs.baseline_train = Micros{uni(1'000'000, 600'000'000)};
    cs.baseline_test = Micros{uni(0, 200'000'000)};
    inst->app.clients.push_back(cs);
  }
  inst->app.n_rounds = 1;
  inst->app.baseline_comm_time = Micros{uni(0, 60'000'000)};
  inst->app.messages = {Bytes{uni(0, 2'000'000'000)}, Bytes{uni(0, 2'000'000'000)}, Bytes{uni(0, 2'000'000'000)},
                        Bytes{uni(0, 10'000)}};

  // Location-specific rows for some datasets, a generic row otherwise; a few
  // VMs stay unmeasured (server-only).
  std::vector<RegionKey> locations;
  for (const auto& c : inst->app.clients)
    if (std::find(locations.begin(), locations.end(), c.dataset_location) == locations.end())
      locations.push_back(c.dataset_location);
  for (const auto& v : vms) {
    if (uni(0, 4) == 0) continue;
    inst->tables.set_exec(v, Ratio{uni(50'000, 5'000'000)});
  }
  for (const auto& loc : locations) {
    if (uni(0, 1) == 0) continue;
    for (const auto& v : vms)
      if (uni(0, 2) != 0) inst->tables.set_exec(loc, v, Ratio{uni(50'000, 5'000'000)});
  }
  for (const auto& loc : locations) {
    bool any = false;
    for (const auto& v : vms) any = any || inst->tables.find_exec(loc, v).has_value();
    if (!any) inst->tables.set_exec(loc, vms[uni(0, static_cast<std::int64_t>(vms.size()) - 1)], Ratio{uni(50'000, 5'000'000)});
  }
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i; j < regions.size(); ++j)
      inst->tables.set_comm(RegionPair::of(regions[i], regions[j]), Ratio{uni(100'000, 20'000'000)});

  // Limits: mostly loose, sometimes tight enough to bind or to be infeasible.
  const int mode = static_cast<int>(uni(0, 3));
  inst->limits.budget_per_round = mode == 1 ? Money::from_micro_dollars(uni(1'000, 2'000'000)) : Money::from_dollars(1e6);
  inst->limits.deadline_per_round = mode == 2 ? Micros{uni(10'000'000, 1'500'000'000)} : Micros{1'000'000'000'000};
  if (mode == 3) {
    inst->limits.budget_per_round = Money::from_micro_dollars(uni(1'000, 3'000'000));
    inst->limits.deadline_per_round = Micros{uni(10'000'000, 2'000'000'000)};
  }
  static constexpr std::int64_t kAlphas[] = {0, 250'000, 500'000, 750'000, 1'000'000};
  inst->alpha = uni(0, 1) == 0 ? Ratio{kAlphas[uni(0, 4)]} : Ratio{uni(0, kMicro)};
  inst->app.alpha = inst->alpha;
  inst->app.budget = inst->limits.budget_per_round;
  inst->app.deadline = inst->limits.deadline_per_round;
  return inst;
}

std::unique_ptr<Instance> synthetic_catalog(const ScenarioBundle& base, int copies, int n_clients,
                                            Money budget_per_round, Micros deadline_per_round) {
  auto inst = std::make_unique<Instance>();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> nudge(-5, 5);  // percent

  std::vector<ProviderSpec> providers = base.env.providers();
  std::map<VmAddress, std::vector<VmAddress>> siblings;
  for (auto& p : providers) {
    p.gpu_quota = Quota::unbounded();
    p.vcpu_quota = Quota::unbounded();
    for (auto& r : p.regions) {
      r.gpu_quota = Quota::unbounded();
      r.vcpu_quota = Quota::unbounded();
      std::vector<VmTypeSpec> expanded;
      for (const auto& vm : r.vm_types) {
        const VmAddress original{p.id, r.id, vm.id};
        expanded.push_back(vm);
        for (int k = 1; k < copies; ++k) {
          VmTypeSpec s = vm;
          s.id = vm.id + "-syn" + std::to_string(k);
          s.label = vm.label.empty() ? "" : vm.label + "s" + std::to_string(k);
          s.on_demand.micro_per_hour = vm.on_demand.micro_per_hour * (100 + nudge(rng)) / 100;
          expanded.push_back(s);
          siblings[original].push_back({p.id, r.id, s.id});
        }
      }
      r.vm_types = std::move(expanded);
    }
  }
  inst->env = MultiCloudEnv(providers);

  inst->tables.baseline_vm = base.tables.baseline_vm;
  inst->tables.baseline_pair = base.tables.baseline_pair;
  for (const auto& [pair, sl] : base.tables.comm_entries()) inst->tables.set_comm(pair, sl);
  for (const auto& [key, sl] : base.tables.exec_entries()) {
    auto put = [&](const VmAddress& vm, Ratio value) {
      if (key.first) inst->tables.set_exec(*key.first, vm, value);
      else inst->tables.set_exec(vm, value);
    };
    put(key.second, sl);
    for (const auto& s : siblings[key.second]) put(s, Ratio{sl.micro * (100 + nudge(rng)) / 100});
  }

  inst->app = base.app;
  inst->app.clients.clear();
  for (int i = 0; i < n_clients; ++i) {
    ClientSpec c = base.app.clients[static_cast<std::size_t>(i) % base.app.clients.size()];
    c.id = "s" + std::to_string(i + 1);
    inst->app.clients.push_back(c);
  }
  inst->app.n_rounds = 1;
  inst->app.budget = budget_per_round;
  inst->app.deadline = deadline_per_round;
  inst->limits = {budget_per_round, deadline_per_round};
  inst->alpha = base.app.alpha;
  return inst;
}

Assignment assign_all(const FlApplication& app, const MultiCloudEnv& env, const std::string& client_vm,
                      const std::string& server_vm) {
  return uniform_assignment(app, *env.resolve(client_vm), *env.resolve(server_vm));
}

}  // namespace fedsched::testkit
