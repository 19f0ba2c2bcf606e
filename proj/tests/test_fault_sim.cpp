#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "fedsched/fault_sim.hpp"
#include "support/test_support.hpp"

using namespace fedsched;
using namespace fedsched::testkit;

namespace {

struct Til {
  const ScenarioBundle& b = fixture("cloudlab_til");
  SchedulingSolution mapping = *solve(make_problem(b.app, b.env, b.tables)).solution;

  SimConfig config(std::optional<double> k_r_s, SimScenario s, std::uint64_t seed) const {
    SimConfig c = b.sim->base;
    c.k_r = k_r_s ? std::optional{Micros::from_seconds(*k_r_s)} : std::nullopt;
    c.scenario = s;
    c.seed = seed;
    return c;
  }
  SimResult run(const SimConfig& c) const { return simulate(mapping, b.app, b.env, b.tables, c); }
};

SimConfig quiet() {
  SimConfig c;
  c.scenario = SimScenario::all_on_demand;
  return c;
}

SimResult with_counts(std::int64_t revocations, double seconds, double dollars) {
  SimResult r;
  r.revocations.clients = revocations;
  r.total_time = Micros::from_seconds(seconds);
  r.total_cost = Money::from_dollars(dollars);
  return r;
}

}  // namespace

TEST(Revocations, EmptyHorizon) {
  auto rng = revocation_stream(1, Task::server());
  EXPECT_TRUE(sample_revocation_times(Micros::from_seconds(7200), Micros{0}, rng).empty());
}

TEST(Revocations, MeanInterArrival) {
  auto rng = revocation_stream(42, Task::client("c1"));
  const Micros k_r = Micros::from_seconds(7200);
  const auto times = sample_revocation_times(k_r, k_r * 100'000, rng);
  ASSERT_GT(times.size(), 90'000u);
  const double mean = times.back().seconds() / static_cast<double>(times.size());
  EXPECT_NEAR(mean, 7200, 72);
  EXPECT_TRUE(std::is_sorted(times.begin(), times.end()));
}

TEST(Revocations, SeededStreamsRepeatAndDiffer) {
  const Micros k_r = Micros::from_seconds(100), horizon = Micros::from_seconds(100'000);
  auto a = revocation_stream(5, Task::client("c1")), b = revocation_stream(5, Task::client("c1"));
  auto c = revocation_stream(5, Task::client("c2")), d = revocation_stream(6, Task::client("c1"));
  const auto ta = sample_revocation_times(k_r, horizon, a);
  EXPECT_EQ(ta, sample_revocation_times(k_r, horizon, b));
  EXPECT_NE(ta, sample_revocation_times(k_r, horizon, c));
  EXPECT_NE(ta, sample_revocation_times(k_r, horizon, d));
}

TEST(Simulate, NoFailuresReproducesAnalyticRound) {
  for (const char* name : {"aws4", "gcp4", "gcp50", "cloudlab_til"}) {
    const auto& b = fixture(name);
    const auto m = *solve(make_problem(b.app, b.env, b.tables)).solution;
    const auto r = simulate(m, b.app, b.env, b.tables, quiet());
    EXPECT_EQ(r.total_time, m.makespan * b.app.n_rounds) << name;
    EXPECT_EQ(r.total_cost, m.costs.total * b.app.n_rounds) << name;
    EXPECT_EQ(r.revocations.total(), 0);
    EXPECT_EQ(r.rounds_re_executed, 0);
    EXPECT_EQ(r.rounds_completed, b.app.n_rounds);
  }
}

TEST(Simulate, SpotPricingWithoutRevocations) {
  Til t;
  const auto r = t.run(t.config(std::nullopt, SimScenario::all_spot, 1));
  EXPECT_EQ(r.revocations.total(), 0);
  auto spot = t.mapping.assignment;
  spot.pricing = PricingPlan::uniform(Pricing::spot);
  const Micros round = t.mapping.makespan + t.b.sim->base.client_checkpoint_time;
  Micros expected = round * t.b.app.n_rounds;
  expected += scale(t.mapping.makespan, t.b.sim->base.first_round_multiplier) - t.mapping.makespan;
  if (t.b.sim->base.checkpoint_interval)
    expected += t.b.sim->base.checkpoint_save_time * (t.b.app.n_rounds / *t.b.sim->base.checkpoint_interval);
  EXPECT_EQ(r.total_time, expected);
  EXPECT_EQ(r.vm_cost, vm_costs(spot, r.total_time, t.b.env));
}

TEST(Simulate, DeterministicPerSeed) {
  Til t;
  const auto cfg = t.config(3600, SimScenario::all_spot, 99);
  const auto a = t.run(cfg), b = t.run(cfg);
  EXPECT_EQ(a, b);
  EXPECT_GT(a.revocations.total(), 0);
  EXPECT_NE(a.events, t.run(t.config(3600, SimScenario::all_spot, 100)).events);
}

TEST(Simulate, EventLogInvariants) {
  Til t;
  for (const auto scenario : {SimScenario::all_spot, SimScenario::server_on_demand_clients_spot}) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      SimConfig cfg = t.config(3600, scenario, seed);
      SimResult r;
      try {
        r = t.run(cfg);
      } catch (const SimulationAborted& e) {
        r = e.partial;
      }
      const auto& ev = r.events;
      EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end(), [](const auto& x, const auto& y) { return x.time < y.time; }));
      EXPECT_EQ(r.total_cost, r.vm_cost + r.message_cost);
      EXPECT_EQ(recompute_cost_from_log(ev, t.b.app, t.b.env, pricing_for(scenario)), r.total_cost) << seed;

      const auto count = [&](SimEventKind k) {
        return std::count_if(ev.begin(), ev.end(), [k](const auto& e) { return e.kind == k; });
      };
      EXPECT_EQ(count(SimEventKind::revocation), r.revocations.total());
      EXPECT_EQ(count(SimEventKind::replacement), r.revocations.total());
      EXPECT_EQ(count(SimEventKind::round_end), r.rounds_completed + r.rounds_re_executed);
      if (scenario == SimScenario::server_on_demand_clients_spot) {
        EXPECT_EQ(r.revocations.server, 0);
      }
    }
  }
}

TEST(Simulate, RecoveryPointReplaysFromLog) {
  // Server recovery resumes from the newest of the last checkpoint and the
  // rounds still on client disks; a replaced client starts with an empty disk.
  Til t;
  std::int64_t total_rolled_back = 0;
  for (const bool keep : {true, false}) {
    for (const std::optional<std::int64_t> interval : {std::optional<std::int64_t>{}, std::optional<std::int64_t>{2}}) {
      for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        SimConfig cfg = t.config(3600, SimScenario::all_spot, seed);
        cfg.clients_keep_weights = keep;
        cfg.checkpoint_interval = interval;
        cfg.revocation_policy = RevocationPolicy::retain_type;
        const auto r = t.run(cfg);
        std::map<std::string, std::int64_t> held;
        std::int64_t checkpoint = 0, expected = 0;
        for (const auto& e : r.events) {
          if (e.kind == SimEventKind::round_end && keep)
            for (const auto& c : t.b.app.clients) held[c.id] = e.round;
          if (e.kind == SimEventKind::checkpoint) checkpoint = e.round;
          if (e.kind == SimEventKind::replacement && !e.task->is_server()) held[e.task->client_id] = 0;
          if (e.kind == SimEventKind::replacement && e.task->is_server()) {
            std::int64_t recovery = checkpoint;
            for (const auto& [id, h] : held) recovery = std::max(recovery, h);
            expected += e.round - std::min(recovery, e.round);
          }
        }
        EXPECT_EQ(r.rounds_re_executed, expected) << keep << " " << seed;
        if (!keep && !interval) {
          EXPECT_EQ(r.rounds_re_executed + r.rounds_completed,
                    std::count_if(r.events.begin(), r.events.end(),
                                  [](const auto& e) { return e.kind == SimEventKind::round_end; }));
        }
        total_rolled_back += r.rounds_re_executed;
      }
    }
  }
  EXPECT_GT(total_rolled_back, 0);
}

TEST(Simulate, FailuresNeverMakeTheRunCheaper) {
  Til t;
  const auto base = t.run(t.config(std::nullopt, SimScenario::all_spot, 1));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = t.config(7200, SimScenario::all_spot, seed);
    cfg.revocation_policy = RevocationPolicy::retain_type;
    const auto r = t.run(cfg);
    EXPECT_GE(r.total_cost, base.total_cost) << seed;
    EXPECT_GE(r.total_time, base.total_time) << seed;
    if (r.revocations.total() == 0) {
      EXPECT_EQ(r.rounds_re_executed, 0);
    }
  }
}

TEST(Simulate, CheckpointOverheadShrinksWithInterval) {
  const auto& b = fixture("gcp4");
  FlApplication app = b.app;
  app.n_rounds = 120;
  const auto m = *solve(make_problem(app, b.env, b.tables)).solution;
  auto cfg = quiet();
  const auto plain = simulate(m, app, b.env, b.tables, cfg).total_time;
  cfg.checkpoint_save_time = Micros::from_seconds(8);
  double prev = 1e9;
  for (std::int64_t x : {10, 20, 30, 40}) {
    cfg.checkpoint_interval = x;
    const auto t = simulate(m, app, b.env, b.tables, cfg).total_time;
    const double overhead = (t - plain).seconds() / plain.seconds();
    EXPECT_LT(overhead, prev) << x;
    EXPECT_EQ(t - plain, cfg.checkpoint_save_time * (120 / x));
    prev = overhead;
  }
}

TEST(Simulate, AbortCarriesPartialResult) {
  Til t;
  auto cfg = t.config(600, SimScenario::all_spot, 3);
  cfg.revocation_policy = RevocationPolicy::remove_type;
  bool aborted = false;
  for (std::uint64_t seed = 1; seed <= 20 && !aborted; ++seed) {
    cfg.seed = seed;
    try {
      t.run(cfg);
    } catch (const SimulationAborted& e) {
      aborted = true;
      EXPECT_LT(e.partial.rounds_completed, t.b.app.n_rounds);
      EXPECT_GT(e.partial.revocations.total(), 0);
      EXPECT_EQ(recompute_cost_from_log(e.partial.events, t.b.app, t.b.env, pricing_for(cfg.scenario)),
                e.partial.total_cost);
    }
  }
  EXPECT_TRUE(aborted);
}

TEST(Simulate, InvalidConfigRejected) {
  SimConfig c;
  c.k_r = Micros{0};
  c.checkpoint_interval = 0;
  c.trials = 0;
  EXPECT_EQ(validate_sim_config(c).size(), 3u);
  Til t;
  EXPECT_THROW(t.run(c), Error);
}

TEST(Trials, SeedsAreDistinctAndStable) {
  EXPECT_EQ(trial_seed(1, 0), trial_seed(1, 0));
  EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
  EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
  Til t;
  auto cfg = t.config(3600, SimScenario::all_spot, 7);
  cfg.trials = 5;
  cfg.revocation_policy = RevocationPolicy::retain_type;
  const auto a = run_trials(t.mapping, t.b.app, t.b.env, t.b.tables, cfg);
  const auto b = run_trials(t.mapping, t.b.app, t.b.env, t.b.tables, cfg);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].result, b[i].result);
}

TEST(Aggregate, Examples) {
  const auto one = aggregate_trials({with_counts(2, 100, 3)});
  EXPECT_EQ(one.revocations.mean, 2);
  EXPECT_FALSE(one.revocations.sd);

  const auto three = aggregate_trials({with_counts(2, 1, 1), with_counts(1, 1, 1), with_counts(1, 1, 1)});
  EXPECT_NEAR(three.revocations.mean, 1.33, 0.005);
  ASSERT_TRUE(three.time_seconds.sd);
  EXPECT_EQ(*three.time_seconds.sd, 0.0);
  EXPECT_NEAR(*three.revocations.sd, std::sqrt(1.0 / 3.0), 1e-12);
  EXPECT_THROW(aggregate_trials({}), std::invalid_argument);
}

TEST(Compare, Examples) {
  const auto same = compare(Micros{5}, Money{7}, Micros{5}, Money{7});
  EXPECT_EQ(same.time, 0.0);
  EXPECT_EQ(same.cost, 0.0);

  const auto g50 = compare(Micros::from_seconds(105), Money::from_dollars(13.84), Micros::from_seconds(227),
                           Money::from_dollars(18.69));
  EXPECT_NEAR(g50.time * 100, 53.74, 0.01);
  EXPECT_NEAR(g50.cost * 100, 25.95, 0.01);

  const auto neg = compare(Micros{1}, Money::from_dollars(1.12), Micros{1}, Money::from_dollars(0.81));
  EXPECT_NEAR(neg.cost * 100, -38.27, 0.01);
  EXPECT_THROW(compare(Micros{1}, Money{1}, Micros{0}, Money{1}), std::domain_error);
}

TEST(EventFormat, RoundTrip) {
  Til t;
  const auto r = t.run(t.config(3600, SimScenario::all_spot, 11));
  ASSERT_FALSE(r.events.empty());
  for (const auto& e : r.events) EXPECT_EQ(parse_event(format_event(e)), e) << format_event(e);
  EXPECT_THROW(parse_event("1.0 explode - - 0"), ParseError);
  EXPECT_THROW(parse_event("garbage"), ParseError);
}

TEST(EventFormat, KindsAndScenariosRoundTrip) {
  for (auto k : {SimEventKind::deploy, SimEventKind::round_start, SimEventKind::round_end, SimEventKind::checkpoint,
                 SimEventKind::revocation, SimEventKind::replacement, SimEventKind::recovery_complete})
    EXPECT_EQ(parse_event_kind(to_string(k)), k);
  for (auto s : {SimScenario::all_spot, SimScenario::server_on_demand_clients_spot, SimScenario::all_on_demand})
    EXPECT_EQ(parse_scenario(to_string(s)), s);
}
