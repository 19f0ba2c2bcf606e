#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fedsched/units.hpp"

namespace fedsched {

// A finite non-negative limit or explicitly unbounded.
class Quota {
 public:
  static Quota unbounded() { return Quota{}; }
  static Quota of(std::int64_t n) { return Quota{n}; }

  bool is_unbounded() const { return !limit_; }
  std::int64_t limit() const { return *limit_; }
  bool allows(std::int64_t used) const { return !limit_ || used <= *limit_; }
  bool operator==(const Quota&) const = default;

 private:
  Quota() = default;
  explicit Quota(std::int64_t n) : limit_(n) {}
  std::optional<std::int64_t> limit_;
};

struct VmTypeSpec {
  std::string id;
  std::string label;  // optional short alias, e.g. "vm121"
  std::int64_t vcpus = 0;
  std::int64_t gpus = 0;
  HourlyPrice on_demand;
  std::optional<HourlyPrice> spot;
  Micros aggregation_time;
};

struct RegionSpec {
  std::string id;
  std::vector<VmTypeSpec> vm_types;
  Quota gpu_quota = Quota::unbounded();
  Quota vcpu_quota = Quota::unbounded();
};

struct ProviderSpec {
  std::string id;
  std::vector<RegionSpec> regions;
  TransferRate transfer_cost;
  Quota gpu_quota = Quota::unbounded();
  Quota vcpu_quota = Quota::unbounded();
};

struct RegionKey {
  std::string provider;
  std::string region;
  auto operator<=>(const RegionKey&) const = default;
  std::string to_string() const { return provider + "/" + region; }
};

struct VmAddress {
  std::string provider;
  std::string region;
  std::string vm_type;

  auto operator<=>(const VmAddress&) const = default;
  RegionKey region_key() const { return {provider, region}; }
  std::string to_string() const { return provider + "/" + region + "/" + vm_type; }
  // Parses "provider/region/vm"; nullopt on malformed text.
  static std::optional<VmAddress> parse(std::string_view text);
};

enum class Pricing { on_demand, spot };

std::string_view to_string(Pricing p);
std::optional<Pricing> parse_pricing(std::string_view text);

// Spot prices default to 30% of on-demand when not given.
inline constexpr std::int64_t kDefaultSpotPercent = 30;

struct Violation {
  std::string path;
  std::string message;
  bool operator==(const Violation&) const = default;
};

class MultiCloudEnv {
 public:
  MultiCloudEnv() = default;
  explicit MultiCloudEnv(std::vector<ProviderSpec> providers);

  const std::vector<ProviderSpec>& providers() const { return providers_; }
  // Every VM address in catalog order.
  const std::vector<VmAddress>& vm_addresses() const { return addresses_; }

  const ProviderSpec* find_provider(std::string_view id) const;
  const RegionSpec* find_region(const RegionKey& key) const;
  const VmTypeSpec* find_vm(const VmAddress& addr) const;

  // Throwing lookups.
  const ProviderSpec& provider(std::string_view id) const;
  const RegionSpec& region(const RegionKey& key) const;
  const VmTypeSpec& vm(const VmAddress& addr) const;

  // Resolves either a VM label or a "provider/region/vm" address.
  std::optional<VmAddress> resolve(std::string_view name) const;
  // Label if the VM has one, else the full address.
  std::string display_name(const VmAddress& addr) const;

 private:
  std::vector<ProviderSpec> providers_;
  std::vector<VmAddress> addresses_;
  // provider, region, vm positions; first occurrence wins on duplicates
  std::map<VmAddress, std::array<std::size_t, 3>> index_;
  std::unordered_map<std::string, VmAddress> labels_;
};

std::vector<Violation> validate_env(const MultiCloudEnv& env);

HourlyPrice price_of(const MultiCloudEnv& env, const VmAddress& addr, Pricing pricing);

struct Tally {
  std::int64_t vcpus = 0;
  std::int64_t gpus = 0;
  bool operator==(const Tally&) const = default;
  Tally& operator+=(const Tally& o) {
    vcpus += o.vcpus;
    gpus += o.gpus;
    return *this;
  }
};

struct CapacityUsage {
  std::map<std::string, Tally> per_provider;
  std::map<RegionKey, Tally> per_region;

  void add(const VmAddress& addr, const VmTypeSpec& vm);
  CapacityUsage& operator+=(const CapacityUsage& o);
  bool operator==(const CapacityUsage&) const = default;
};

// Usage of an arbitrary multiset of VM placements.
CapacityUsage capacity_usage(const MultiCloudEnv& env, const std::vector<VmAddress>& placements);

}  // namespace fedsched
