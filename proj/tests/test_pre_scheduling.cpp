#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fedsched/errors.hpp"
#include "fedsched/pre_scheduling.hpp"
#include "support/test_support.hpp"

using namespace fedsched;
using fedsched::testkit::fixture;

namespace {

Micros mmss(const std::string& s) {
  const auto colon = s.find(':');
  return Micros::from_seconds(std::stoi(s.substr(0, colon)) * 60 + std::stoi(s.substr(colon + 1)));
}

ExecMeasurement row(const VmAddress& vm, const char* r2_train, const char* r2_test) {
  return {vm, Micros{}, Micros{}, mmss(r2_train), mmss(r2_test)};
}

ExecMeasurement secs(const VmAddress& vm, double r2_train, double r2_test) {
  return {vm, Micros{}, Micros{}, Micros::from_seconds(r2_train), Micros::from_seconds(r2_test)};
}

CommMeasurement comm(RegionKey a, RegionKey b, double train, double test) {
  return {RegionPair::of(a, b), Micros::from_seconds(train), Micros::from_seconds(test)};
}

const RegionKey kEast{"aws", "us-east-1"}, kWest2{"aws", "us-west-2"}, kCentral{"gcp", "us-central1"},
    kWest1{"gcp", "us-west1"};

struct RoundedExec {
  const char* label;
  const char* train;
  const char* test;
  double rounded;
};

// Second-round columns and Sl of both execution tables.
const std::vector<RoundedExec> kAwsDataset = {
    {"vm111", "06:53", "03:03", 1.00}, {"vm112", "31:23", "19:09", 5.09}, {"vm121", "06:34", "03:14", 0.99},
    {"vm122", "27:47", "16:19", 4.44}, {"vm211", "07:09", "03:04", 1.03}, {"vm212", "07:53", "04:47", 1.28},
    {"vm213", "07:20", "02:56", 1.04}, {"vm221", "07:24", "03:11", 1.07}, {"vm222", "07:23", "03:31", 1.10}};
const std::vector<RoundedExec> kGcpDataset = {
    {"vm111", "03:04", "00:49", 1.00}, {"vm112", "04:45", "01:09", 1.52}, {"vm121", "04:01", "01:15", 1.36},
    {"vm122", "05:48", "01:40", 1.92}, {"vm211", "02:44", "00:32", 0.84}, {"vm212", "02:57", "00:30", 0.89},
    {"vm213", "01:11", "00:26", 0.42}, {"vm221", "02:56", "00:53", 0.99}, {"vm222", "02:41", "00:49", 0.90}};

}  // namespace

TEST(PreScheduling, ExecSlowdownIdentity) {
  const auto m = secs({"a", "b", "c"}, 412.94, 182.77);
  EXPECT_EQ(exec_slowdown(m, m), Ratio::one());
}

TEST(PreScheduling, ExecSlowdownExamples) {
  const VmAddress any{"a", "b", "c"};
  EXPECT_NEAR(exec_slowdown(secs(any, 71, 26), secs(any, 184, 49)).value(), 0.42, 0.005);
  EXPECT_NEAR(exec_slowdown(secs(any, 4.53, 0.62), secs(any, 112.83, 2.22)).value(), 0.045, 0.0005);
  EXPECT_THROW(exec_slowdown(secs(any, 1, 1), secs(any, 0, 0)), std::domain_error);
}

TEST(PreScheduling, CommSlowdownExamples) {
  const auto base = comm(kEast, kEast, 6.68, 3.59);
  EXPECT_EQ(comm_slowdown(base, base), Ratio::one());
  EXPECT_NEAR(comm_slowdown(comm(kCentral, kCentral, 2.30, 1.21), base).value(), 0.34, 0.005);
  EXPECT_NEAR(comm_slowdown(comm(kEast, kWest2, 39.67, 20.30), base).value(), 5.84, 0.005);
}

TEST(PreScheduling, RoundedExecTablesMatchRawTimes) {
  const auto& env = fixture("aws4").env;
  for (const auto* table : {&kAwsDataset, &kGcpDataset}) {
    const auto& base = table->front();
    const auto b = row(*env.resolve(base.label), base.train, base.test);
    for (const auto& r : *table) {
      const double sl = exec_slowdown(row(*env.resolve(r.label), r.train, r.test), b).value();
      EXPECT_NEAR(sl, r.rounded, 0.01) << r.label;
    }
  }
}

TEST(PreScheduling, RoundedCommTableMatchesRawTimes) {
  const auto base = comm(kEast, kEast, 6.68, 3.59);
  const std::vector<std::pair<CommMeasurement, double>> rows = {
      {comm(kEast, kWest2, 39.67, 20.30), 5.84},   {comm(kEast, kCentral, 22.83, 12.07), 3.40},
      {comm(kEast, kWest1, 33.02, 16.10), 4.78},   {comm(kWest2, kWest2, 6.56, 3.41), 0.97},
      {comm(kWest2, kCentral, 33.25, 14.53), 4.65}, {comm(kWest2, kWest1, 20.42, 10.83), 3.04},
      {comm(kCentral, kCentral, 2.30, 1.21), 0.34}, {comm(kCentral, kWest1, 7.35, 3.86), 1.09},
      {comm(kWest1, kWest1, 4.09, 2.30), 0.62}};
  for (const auto& [m, rounded] : rows) EXPECT_NEAR(comm_slowdown(m, base).value(), rounded, 0.01) << m.pair.to_string();
}

TEST(PreScheduling, FixtureTablesWithinRoundingOfRawTimes) {
  // The shipped tables carry two-decimal values.
  for (const char* name : {"aws4", "gcp50"}) {
    const auto& b = fixture(name);
    for (const auto& [loc, table] : {std::pair{kEast, &kAwsDataset}, std::pair{kCentral, &kGcpDataset}}) {
      const auto base = row(*b.env.resolve(table->front().label), table->front().train, table->front().test);
      for (const auto& r : *table) {
        const auto vm = *b.env.resolve(r.label);
        const double raw = exec_slowdown(row(vm, r.train, r.test), base).value();
        EXPECT_NEAR(b.tables.exec(loc, vm).value(), raw, 0.01) << name << " " << r.label;
      }
    }
  }
}

TEST(PreScheduling, ExpectedExecTime) {
  const auto& b = fixture("aws4");
  ClientSpec aws{"a", kEast, Micros::from_seconds(412.94), Micros::from_seconds(182.77)};
  ClientSpec gcp{"g", kCentral, Micros::from_seconds(183.53), Micros::from_seconds(49.47)};
  EXPECT_EQ(expected_exec_time(aws, *b.env.resolve("vm121"), b.tables), Micros::from_seconds(589.7529));
  EXPECT_EQ(expected_exec_time(gcp, *b.env.resolve("vm213"), b.tables), Micros::from_seconds(97.86));
  EXPECT_EQ(expected_exec_time(aws, *b.env.resolve("vm111"), b.tables), aws.baseline_total());
  EXPECT_THROW(expected_exec_time(aws, *b.env.resolve("vm113"), b.tables), MissingSlowdown);
}

TEST(PreScheduling, ExpectedCommTime) {
  const auto& b = fixture("aws4");
  EXPECT_EQ(expected_comm_time(kCentral, kCentral, b.app, b.tables), Micros::from_seconds(9.2684));
  EXPECT_EQ(expected_comm_time(kEast, kEast, b.app, b.tables), Micros::from_seconds(27.26));
  EXPECT_EQ(expected_comm_time(kEast, kWest2, b.app, b.tables), Micros::from_seconds(159.1984));
  SlowdownTables empty;
  EXPECT_THROW(expected_comm_time(kEast, kWest2, b.app, empty), MissingSlowdown);
}

TEST(PreScheduling, CommLookupIsSymmetric) {
  const auto& b = fixture("aws4");
  for (const auto& x : {kEast, kWest2, kCentral, kWest1})
    for (const auto& y : {kEast, kWest2, kCentral, kWest1})
      EXPECT_EQ(expected_comm_time(x, y, b.app, b.tables), expected_comm_time(y, x, b.app, b.tables));
}

TEST(PreScheduling, ExecTimeIsLinearInBaseline) {
  const auto& b = fixture("gcp4");
  for (const auto& vm : b.env.vm_addresses()) {
    if (!b.tables.find_exec(kCentral, vm)) continue;
    ClientSpec c{"c", kCentral, Micros{100'000'000}, Micros{20'000'000}};
    ClientSpec c3{"c", kCentral, Micros{300'000'000}, Micros{60'000'000}};
    const auto t1 = expected_exec_time(c, vm, b.tables), t3 = expected_exec_time(c3, vm, b.tables);
    EXPECT_LE(std::llabs(t3.us - 3 * t1.us), 1) << vm.to_string();
  }
}

TEST(PreScheduling, LocationSpecificBeforeGeneric) {
  SlowdownTables t;
  const VmAddress vm{"p", "r", "v"};
  t.set_exec(vm, Ratio{2'000'000});
  t.set_exec(kEast, vm, Ratio{500'000});
  EXPECT_EQ(t.exec(kEast, vm), Ratio{500'000});
  EXPECT_EQ(t.exec(kCentral, vm), Ratio{2'000'000});
  EXPECT_FALSE(t.find_exec(kCentral, {"p", "r", "other"}));
}

TEST(PreScheduling, Extrapolation) {
  EXPECT_EQ(extrapolate_total_runtime(Micros{10}, Micros{8}, 1), Micros{10});
  EXPECT_EQ(extrapolate_total_runtime(Micros{10}, Micros{8}, 5), Micros{42});
  EXPECT_EQ(extrapolate_total_runtime(Micros{7}, Micros{7}, 9), Micros{63});
}

TEST(PreScheduling, ApplyMeasurementsAveragesBothDirections) {
  SlowdownTables t;
  CommMeasurementSet set{RegionPair::of(kEast, kEast),
                         {comm(kEast, kEast, 6.0, 4.0), {{kWest2, kEast}, Micros{20'000'000}, Micros{0}},
                          {{kEast, kWest2}, Micros{40'000'000}, Micros{0}}}};
  apply_measurements(t, {}, set);
  EXPECT_EQ(t.comm(kEast, kEast), Ratio::one());
  EXPECT_EQ(t.comm(kWest2, kEast), Ratio{3'000'000});
}

TEST(PreScheduling, ApplyExecMeasurements) {
  const VmAddress base{"p", "r", "base"}, fast{"p", "r", "fast"};
  SlowdownTables t;
  ExecMeasurementSet set{kEast, base, {secs(base, 100, 20), secs(fast, 50, 10)}};
  apply_measurements(t, {set}, std::nullopt);
  EXPECT_EQ(t.exec(kEast, base), Ratio::one());
  EXPECT_EQ(t.exec(kEast, fast), Ratio{500'000});
  EXPECT_FALSE(t.find_exec(kCentral, fast));
}

TEST(PreScheduling, ValidateTables) {
  const auto& b = fixture("aws4");
  std::vector<Violation> warnings;
  EXPECT_TRUE(validate_tables(b.tables, b.env, &warnings).empty());
  EXPECT_EQ(warnings.size(), 4u);  // the four GPU-less server VMs

  SlowdownTables bad = b.tables;
  bad.set_exec(kEast, *b.env.resolve("vm111"), Ratio{990'000});
  bad.set_comm(RegionPair::of(kEast, kWest1), Ratio{0});
  bad.set_exec({"aws", "nowhere", "x"}, Ratio::one());
  EXPECT_GE(validate_tables(bad, b.env).size(), 3u);
}
