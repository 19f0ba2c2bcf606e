#pragma once

#include <map>
#include <optional>
#include <vector>

#include "fedsched/app_model.hpp"
#include "fedsched/cloud_model.hpp"

namespace fedsched {

// Unordered region pair, stored sorted.
struct RegionPair {
  RegionKey first;
  RegionKey second;

  static RegionPair of(RegionKey a, RegionKey b);
  auto operator<=>(const RegionPair&) const = default;
  std::string to_string() const { return first.to_string() + "~" + second.to_string(); }
};

struct ExecMeasurement {
  VmAddress vm;
  Micros round1_train;
  Micros round1_test;
  Micros round2_train;
  Micros round2_test;
};

struct CommMeasurement {
  RegionPair pair;
  Micros train_time;
  Micros test_time;
};

// Execution slowdowns are looked up by (dataset location, VM) first and by
// VM alone second: the same VM runs at a different relative speed depending
// on where the client's data lives.
class SlowdownTables {
 public:
  using ExecKey = std::pair<std::optional<RegionKey>, VmAddress>;

  void set_exec(const VmAddress& vm, Ratio sl) { exec_[{std::nullopt, vm}] = sl; }
  void set_exec(const RegionKey& dataset_location, const VmAddress& vm, Ratio sl) { exec_[{dataset_location, vm}] = sl; }
  void set_comm(const RegionPair& pair, Ratio sl) { comm_[pair] = sl; }

  std::optional<Ratio> find_exec(const RegionKey& dataset_location, const VmAddress& vm) const;
  std::optional<Ratio> find_comm(const RegionKey& a, const RegionKey& b) const;
  Ratio exec(const RegionKey& dataset_location, const VmAddress& vm) const;  // throws MissingSlowdown
  Ratio comm(const RegionKey& a, const RegionKey& b) const;                  // throws MissingSlowdown

  const std::map<ExecKey, Ratio>& exec_entries() const { return exec_; }
  const std::map<RegionPair, Ratio>& comm_entries() const { return comm_; }

  std::optional<VmAddress> baseline_vm;
  std::optional<RegionPair> baseline_pair;

 private:
  std::map<ExecKey, Ratio> exec_;
  std::map<RegionPair, Ratio> comm_;
};

Ratio exec_slowdown(const ExecMeasurement& m, const ExecMeasurement& baseline);
Ratio comm_slowdown(const CommMeasurement& m, const CommMeasurement& baseline);

Micros expected_exec_time(const ClientSpec& client, const VmAddress& vm, const SlowdownTables& tables);
Micros expected_comm_time(const RegionKey& a, const RegionKey& b, const FlApplication& app,
                          const SlowdownTables& tables);

// First epoch plus (n_ep - 1) steady-state epochs.
Micros extrapolate_total_runtime(Micros ep1, Micros ep2, std::int64_t n_ep);

struct ExecMeasurementSet {
  std::optional<RegionKey> dataset_location;
  VmAddress baseline_vm;
  std::vector<ExecMeasurement> rows;
};

struct CommMeasurementSet {
  RegionPair baseline_pair;
  std::vector<CommMeasurement> rows;  // a pair may appear once per direction; times are averaged
};

// Writes the slowdowns derived from raw timings into `tables`, replacing any
// entries with the same key.
void apply_measurements(SlowdownTables& tables, const std::vector<ExecMeasurementSet>& exec,
                        const std::optional<CommMeasurementSet>& comm);

// Structural problems (non-positive slowdowns, baselines not 1.0, unknown
// addresses) plus `warnings` for VMs that have no execution slowdown at all.
std::vector<Violation> validate_tables(const SlowdownTables& tables, const MultiCloudEnv& env,
                                       std::vector<Violation>* warnings = nullptr);

}  // namespace fedsched
