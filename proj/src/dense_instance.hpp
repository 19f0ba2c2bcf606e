#pragma once

// Index-based view of a Problem shared by the exact solver and the
// enumeration oracle. VMs are sorted by address and clients by id, so index
// order is the tie-break order.

#include <vector>

#include "fedsched/initial_mapping.hpp"

namespace fedsched::detail {

struct DenseInstance {
  explicit DenseInstance(const Problem& p);

  std::size_t n_vms() const { return vms.size(); }
  std::size_t n_clients() const { return client_ids.size(); }

  std::vector<VmAddress> vms;
  std::vector<std::size_t> provider_of;  // per VM
  std::vector<std::size_t> region_of;    // per VM, global region index
  std::vector<std::int64_t> vcpus, gpus;
  std::vector<HourlyPrice> client_price, server_price;
  std::vector<Micros> aggregation;

  std::vector<Quota> provider_gpu, provider_vcpu;
  std::vector<Quota> region_gpu, region_vcpu;

  std::vector<std::string> client_ids;         // sorted
  std::vector<std::size_t> client_index;       // position in app.clients
  std::vector<std::size_t> client_group;       // clients with identical data share a group
  std::size_t n_groups = 0;
  std::vector<std::vector<Micros>> group_exec;  // [group][vm]; negative = not a candidate

  std::vector<std::vector<Micros>> comm_time;   // [region][region]
  std::vector<std::vector<Money>> comm_cost;    // [client provider][server provider]

  NormalizationConstants norms;
  Money budget;
  Micros deadline;
  Ratio alpha;
  bool enforce_quotas = true;

  bool is_candidate(std::size_t group, std::size_t vm) const { return group_exec[group][vm].us >= 0; }

  Assignment to_assignment(std::size_t server, const std::vector<std::size_t>& client_vms,
                           PricingPlan pricing) const;
};

// Running vCPU/GPU totals against the quota vectors of a DenseInstance.
class UsageTracker {
 public:
  explicit UsageTracker(const DenseInstance& d);
  // Returns false (and leaves the totals unchanged) when adding `vm` breaks a quota.
  bool try_add(std::size_t vm);
  void remove(std::size_t vm);

 private:
  const DenseInstance& d_;
  std::vector<std::int64_t> pg_, pc_, rg_, rc_;
};

}  // namespace fedsched::detail
