#include "fedsched/pre_scheduling.hpp"

#include <stdexcept>

#include "fedsched/errors.hpp"

namespace fedsched {

RegionPair RegionPair::of(RegionKey a, RegionKey b) {
  if (b < a) std::swap(a, b);
  return RegionPair{std::move(a), std::move(b)};
}

std::optional<Ratio> SlowdownTables::find_exec(const RegionKey& dataset_location, const VmAddress& vm) const {
  if (auto it = exec_.find({dataset_location, vm}); it != exec_.end()) return it->second;
  if (auto it = exec_.find({std::nullopt, vm}); it != exec_.end()) return it->second;
  return std::nullopt;
}

std::optional<Ratio> SlowdownTables::find_comm(const RegionKey& a, const RegionKey& b) const {
  if (auto it = comm_.find(RegionPair::of(a, b)); it != comm_.end()) return it->second;
  return std::nullopt;
}

Ratio SlowdownTables::exec(const RegionKey& dataset_location, const VmAddress& vm) const {
  if (auto sl = find_exec(dataset_location, vm)) return *sl;
  throw MissingSlowdown("no execution slowdown for " + vm.to_string() + " with dataset in " +
                        dataset_location.to_string());
}

Ratio SlowdownTables::comm(const RegionKey& a, const RegionKey& b) const {
  if (auto sl = find_comm(a, b)) return *sl;
  throw MissingSlowdown("no communication slowdown for " + RegionPair::of(a, b).to_string());
}

Ratio exec_slowdown(const ExecMeasurement& m, const ExecMeasurement& baseline) {
  const Micros base = baseline.round2_train + baseline.round2_test;
  if (base.us <= 0) throw std::domain_error("baseline second-round time is zero");
  return ratio_of(m.round2_train + m.round2_test, base);
}

Ratio comm_slowdown(const CommMeasurement& m, const CommMeasurement& baseline) {
  const Micros base = baseline.train_time + baseline.test_time;
  if (base.us <= 0) throw std::domain_error("baseline communication time is zero");
  return ratio_of(m.train_time + m.test_time, base);
}

Micros expected_exec_time(const ClientSpec& client, const VmAddress& vm, const SlowdownTables& tables) {
  return scale(client.baseline_total(), tables.exec(client.dataset_location, vm));
}

Micros expected_comm_time(const RegionKey& a, const RegionKey& b, const FlApplication& app,
                          const SlowdownTables& tables) {
  return scale(app.baseline_comm_time, tables.comm(a, b));
}

Micros extrapolate_total_runtime(Micros ep1, Micros ep2, std::int64_t n_ep) {
  if (n_ep < 1) throw std::invalid_argument("n_ep must be >= 1");
  return ep1 + ep2 * (n_ep - 1);
}

void apply_measurements(SlowdownTables& tables, const std::vector<ExecMeasurementSet>& exec,
                        const std::optional<CommMeasurementSet>& comm) {
  for (const auto& set : exec) {
    const ExecMeasurement* base = nullptr;
    for (const auto& row : set.rows)
      if (row.vm == set.baseline_vm) base = &row;
    if (!base) throw MissingSlowdown("raw measurements lack the baseline VM " + set.baseline_vm.to_string());
    for (const auto& row : set.rows) {
      const Ratio sl = exec_slowdown(row, *base);
      if (set.dataset_location) tables.set_exec(*set.dataset_location, row.vm, sl);
      else tables.set_exec(row.vm, sl);
    }
    if (!tables.baseline_vm) tables.baseline_vm = set.baseline_vm;
  }
  if (comm) {
    // Average both directions of a pair before taking ratios.
    std::map<RegionPair, std::pair<Micros, std::int64_t>> sums;
    for (const auto& row : comm->rows) {
      auto& [sum, n] = sums[RegionPair::of(row.pair.first, row.pair.second)];
      sum += row.train_time + row.test_time;
      ++n;
    }
    auto base_it = sums.find(comm->baseline_pair);
    if (base_it == sums.end())
      throw MissingSlowdown("raw measurements lack the baseline pair " + comm->baseline_pair.to_string());
    const auto [base_sum, base_n] = base_it->second;
    if (base_sum.us <= 0) throw std::domain_error("baseline communication time is zero");
    for (const auto& [pair, sn] : sums) {
      const auto [sum, n] = sn;
      // (sum/n) / (base_sum/base_n)
      const i128 num = i128{sum.us} * base_n * kMicro;
      const i128 den = i128{base_sum.us} * n;
      tables.set_comm(pair, Ratio{static_cast<std::int64_t>(div_round(num, den))});
    }
    tables.baseline_pair = comm->baseline_pair;
  }
}

std::vector<Violation> validate_tables(const SlowdownTables& tables, const MultiCloudEnv& env,
                                       std::vector<Violation>* warnings) {
  std::vector<Violation> out;
  for (const auto& [key, sl] : tables.exec_entries()) {
    const auto& [loc, vm] = key;
    const std::string path = "slowdowns.exec." + (loc ? loc->to_string() + "." : std::string()) + vm.to_string();
    if (!env.find_vm(vm)) out.push_back({path, "unknown VM"});
    if (loc && !env.find_region(*loc)) out.push_back({path, "unknown dataset location"});
    if (sl.micro <= 0) out.push_back({path, "slowdown must be positive"});
    if (tables.baseline_vm && vm == *tables.baseline_vm && sl != Ratio::one())
      out.push_back({path, "baseline VM slowdown must be exactly 1.0"});
  }
  for (const auto& [pair, sl] : tables.comm_entries()) {
    const std::string path = "slowdowns.comm." + pair.to_string();
    if (!env.find_region(pair.first) || !env.find_region(pair.second)) out.push_back({path, "unknown region"});
    if (sl.micro <= 0) out.push_back({path, "slowdown must be positive"});
    if (tables.baseline_pair && pair == *tables.baseline_pair && sl != Ratio::one())
      out.push_back({path, "baseline pair slowdown must be exactly 1.0"});
  }
  if (warnings) {
    for (const auto& addr : env.vm_addresses()) {
      bool any = false;
      for (const auto& [key, sl] : tables.exec_entries())
        if (key.second == addr) any = true;
      if (!any)
        warnings->push_back({"slowdowns.exec." + addr.to_string(), "no execution slowdown; usable as server only"});
    }
  }
  return out;
}

}  // namespace fedsched
