#pragma once

#include <map>
#include <string>

#include "fedsched/cloud_model.hpp"

namespace fedsched {

// Pricing model per task role. Uniform plans are the common case; the mixed
// plan covers "server on-demand, clients spot" deployments.
struct PricingPlan {
  Pricing server = Pricing::on_demand;
  Pricing clients = Pricing::on_demand;

  static PricingPlan uniform(Pricing p) { return {p, p}; }
  bool operator==(const PricingPlan&) const = default;
};

// One VM per client and one for the server; clients are keyed by id.
struct Assignment {
  std::map<std::string, VmAddress> client_vm;
  VmAddress server_vm;
  PricingPlan pricing;

  bool operator==(const Assignment&) const = default;
};

// Deterministic tie-break order: server address, then client addresses in client id order.
bool key_less(const Assignment& a, const Assignment& b);

CapacityUsage capacity_usage(const MultiCloudEnv& env, const Assignment& assignment);

}  // namespace fedsched
