#include "fedsched/cloud_model.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "fedsched/errors.hpp"

namespace fedsched {

std::optional<VmAddress> VmAddress::parse(std::string_view text) {
  const auto a = text.find('/');
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = text.find('/', a + 1);
  if (b == std::string_view::npos || text.find('/', b + 1) != std::string_view::npos) return std::nullopt;
  VmAddress out{std::string(text.substr(0, a)), std::string(text.substr(a + 1, b - a - 1)),
                std::string(text.substr(b + 1))};
  if (out.provider.empty() || out.region.empty() || out.vm_type.empty()) return std::nullopt;
  return out;
}

std::string_view to_string(Pricing p) { return p == Pricing::spot ? "spot" : "on-demand"; }

std::optional<Pricing> parse_pricing(std::string_view text) {
  if (text == "on-demand" || text == "on_demand") return Pricing::on_demand;
  if (text == "spot") return Pricing::spot;
  return std::nullopt;
}

MultiCloudEnv::MultiCloudEnv(std::vector<ProviderSpec> providers) : providers_(std::move(providers)) {
  for (std::size_t p = 0; p < providers_.size(); ++p) {
    const auto& prov = providers_[p];
    for (std::size_t r = 0; r < prov.regions.size(); ++r) {
      const auto& reg = prov.regions[r];
      for (std::size_t v = 0; v < reg.vm_types.size(); ++v) {
        const auto& vm = reg.vm_types[v];
        VmAddress addr{prov.id, reg.id, vm.id};
        if (index_.emplace(addr, std::array{p, r, v}).second) addresses_.push_back(addr);
        if (!vm.label.empty()) labels_.emplace(vm.label, addr);
      }
    }
  }
}

const ProviderSpec* MultiCloudEnv::find_provider(std::string_view id) const {
  for (const auto& p : providers_)
    if (p.id == id) return &p;
  return nullptr;
}

const RegionSpec* MultiCloudEnv::find_region(const RegionKey& key) const {
  const auto* p = find_provider(key.provider);
  if (!p) return nullptr;
  for (const auto& r : p->regions)
    if (r.id == key.region) return &r;
  return nullptr;
}

const VmTypeSpec* MultiCloudEnv::find_vm(const VmAddress& addr) const {
  auto it = index_.find(addr);
  if (it == index_.end()) return nullptr;
  const auto [p, r, v] = it->second;
  return &providers_[p].regions[r].vm_types[v];
}

const ProviderSpec& MultiCloudEnv::provider(std::string_view id) const {
  if (const auto* p = find_provider(id)) return *p;
  throw UnresolvableAddress("unknown provider '" + std::string(id) + "'");
}

const RegionSpec& MultiCloudEnv::region(const RegionKey& key) const {
  if (const auto* r = find_region(key)) return *r;
  throw UnresolvableAddress("unknown region '" + key.to_string() + "'");
}

const VmTypeSpec& MultiCloudEnv::vm(const VmAddress& addr) const {
  if (const auto* v = find_vm(addr)) return *v;
  throw UnresolvableAddress("unknown VM '" + addr.to_string() + "'");
}

std::optional<VmAddress> MultiCloudEnv::resolve(std::string_view name) const {
  if (auto it = labels_.find(std::string(name)); it != labels_.end()) return it->second;
  auto addr = VmAddress::parse(name);
  if (addr && find_vm(*addr)) return addr;
  return std::nullopt;
}

std::string MultiCloudEnv::display_name(const VmAddress& addr) const {
  const auto* v = find_vm(addr);
  return v && !v->label.empty() ? v->label : addr.to_string();
}

namespace {

void check_quota_nesting(const Quota& region, const Quota& provider, const std::string& path, const char* what,
                         std::vector<Violation>& out) {
  if (!region.is_unbounded() && !provider.is_unbounded() && region.limit() > provider.limit()) {
    out.push_back({path + "." + what, "region quota " + std::to_string(region.limit()) + " exceeds provider quota " +
                                          std::to_string(provider.limit())});
  }
}

void check_quota_sign(const Quota& q, const std::string& path, std::vector<Violation>& out) {
  if (!q.is_unbounded() && q.limit() < 0) out.push_back({path, "quota must be non-negative"});
}

}  // namespace

std::vector<Violation> validate_env(const MultiCloudEnv& env) {
  std::vector<Violation> out;
  if (env.providers().empty()) out.push_back({"providers", "environment has no providers"});
  std::set<std::string> provider_ids;
  bool any_region = false, any_vm = false;
  for (const auto& p : env.providers()) {
    const std::string pp = "providers." + p.id;
    if (p.id.empty()) out.push_back({pp, "empty provider id"});
    if (!provider_ids.insert(p.id).second) out.push_back({pp, "duplicate provider id"});
    if (p.transfer_cost.micro_per_gb < 0) out.push_back({pp + ".transfer_cost", "transfer cost must be >= 0"});
    check_quota_sign(p.gpu_quota, pp + ".gpu_quota", out);
    check_quota_sign(p.vcpu_quota, pp + ".vcpu_quota", out);
    std::set<std::string> region_ids;
    for (const auto& r : p.regions) {
      any_region = true;
      const std::string rp = pp + ".regions." + r.id;
      if (r.id.empty()) out.push_back({rp, "empty region id"});
      if (!region_ids.insert(r.id).second) out.push_back({rp, "duplicate region id"});
      check_quota_sign(r.gpu_quota, rp + ".gpu_quota", out);
      check_quota_sign(r.vcpu_quota, rp + ".vcpu_quota", out);
      check_quota_nesting(r.gpu_quota, p.gpu_quota, rp, "gpu_quota", out);
      check_quota_nesting(r.vcpu_quota, p.vcpu_quota, rp, "vcpu_quota", out);
      std::set<std::string> vm_ids;
      for (const auto& v : r.vm_types) {
        any_vm = true;
        const std::string vp = rp + ".vm_types." + v.id;
        if (v.id.empty()) out.push_back({vp, "empty vm type id"});
        if (!vm_ids.insert(v.id).second) out.push_back({vp, "duplicate vm type id"});
        if (v.vcpus <= 0) out.push_back({vp + ".vcpus", "vcpus must be positive"});
        if (v.gpus < 0) out.push_back({vp + ".gpus", "gpus must be >= 0"});
        if (v.on_demand.micro_per_hour <= 0) out.push_back({vp + ".on_demand_price", "price must be positive"});
        if (v.spot) {
          if (v.spot->micro_per_hour <= 0) out.push_back({vp + ".spot_price", "spot price must be positive"});
          if (*v.spot > v.on_demand) out.push_back({vp + ".spot_price", "spot price exceeds on-demand price"});
        }
        if (v.aggregation_time.us < 0) out.push_back({vp + ".aggregation_time", "aggregation time must be >= 0"});
      }
    }
  }
  if (!env.providers().empty()) {
    if (!any_region) out.push_back({"providers", "environment has no regions"});
    else if (!any_vm) out.push_back({"providers", "environment has no VM types"});
  }
  // Report in a provider-order independent sequence.
  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.path, a.message) < std::tie(b.path, b.message);
  });
  return out;
}

HourlyPrice price_of(const MultiCloudEnv& env, const VmAddress& addr, Pricing pricing) {
  const auto& vm = env.vm(addr);
  if (pricing == Pricing::on_demand) return vm.on_demand;
  if (vm.spot) return *vm.spot;
  return HourlyPrice{static_cast<std::int64_t>(
      div_round(i128{vm.on_demand.micro_per_hour} * kDefaultSpotPercent, 100))};
}

void CapacityUsage::add(const VmAddress& addr, const VmTypeSpec& vm) {
  const Tally t{vm.vcpus, vm.gpus};
  per_provider[addr.provider] += t;
  per_region[addr.region_key()] += t;
}

CapacityUsage& CapacityUsage::operator+=(const CapacityUsage& o) {
  for (const auto& [k, t] : o.per_provider) per_provider[k] += t;
  for (const auto& [k, t] : o.per_region) per_region[k] += t;
  return *this;
}

CapacityUsage capacity_usage(const MultiCloudEnv& env, const std::vector<VmAddress>& placements) {
  CapacityUsage u;
  for (const auto& a : placements) u.add(a, env.vm(a));
  return u;
}

}  // namespace fedsched
