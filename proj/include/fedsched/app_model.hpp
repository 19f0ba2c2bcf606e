#pragma once

#include <string>
#include <vector>

#include "fedsched/cloud_model.hpp"

namespace fedsched {

struct ClientSpec {
  std::string id;
  RegionKey dataset_location;
  Micros baseline_train;
  Micros baseline_test;

  Micros baseline_total() const { return baseline_train + baseline_test; }
};

struct MessageProfile {
  Bytes server_train;
  Bytes server_aggreg;
  Bytes client_train;
  Bytes client_test;
};

struct FlApplication {
  std::vector<ClientSpec> clients;
  std::int64_t n_rounds = 1;
  std::int64_t epochs_per_round = 1;
  MessageProfile messages;
  Money budget;
  Micros deadline;
  Ratio alpha = Ratio{kMicro / 2};
  // train + test communication time on the baseline region pair
  Micros baseline_comm_time;
};

struct RoundLimits {
  Money budget_per_round;
  Micros deadline_per_round;
};

// B / n_rounds and T / n_rounds, rounded to the nearest micro-dollar and microsecond.
RoundLimits round_limits(const FlApplication& app);

std::vector<Violation> validate_app(const FlApplication& app, const MultiCloudEnv& env);

}  // namespace fedsched
