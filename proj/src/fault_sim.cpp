#include "fedsched/fault_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace fedsched {

std::string_view to_string(SimScenario s) {
  switch (s) {
    case SimScenario::all_spot: return "all_spot";
    case SimScenario::server_on_demand_clients_spot: return "server_on_demand_clients_spot";
    case SimScenario::all_on_demand: return "all_on_demand";
  }
  return "unknown";
}

std::optional<SimScenario> parse_scenario(std::string_view text) {
  for (auto s : {SimScenario::all_spot, SimScenario::server_on_demand_clients_spot, SimScenario::all_on_demand})
    if (text == to_string(s)) return s;
  if (text == "server_on_demand") return SimScenario::server_on_demand_clients_spot;
  return std::nullopt;
}

PricingPlan pricing_for(SimScenario s) {
  switch (s) {
    case SimScenario::all_spot: return PricingPlan::uniform(Pricing::spot);
    case SimScenario::server_on_demand_clients_spot: return {Pricing::on_demand, Pricing::spot};
    case SimScenario::all_on_demand: return PricingPlan::uniform(Pricing::on_demand);
  }
  return {};
}

std::vector<Violation> validate_sim_config(const SimConfig& cfg) {
  std::vector<Violation> out;
  if (cfg.k_r && cfg.k_r->us <= 0) out.push_back({"simulation.k_r_seconds", "must be positive (or null to disable)"});
  if (cfg.checkpoint_interval && *cfg.checkpoint_interval < 1)
    out.push_back({"simulation.checkpoint_interval_rounds", "must be >= 1 (or null to disable)"});
  if (cfg.checkpoint_save_time.us < 0) out.push_back({"simulation.checkpoint_save_seconds", "must be >= 0"});
  if (cfg.client_checkpoint_time.us < 0) out.push_back({"simulation.client_checkpoint_seconds", "must be >= 0"});
  if (cfg.vm_prep_time.us < 0) out.push_back({"simulation.vm_prep_seconds", "must be >= 0"});
  if (cfg.first_round_multiplier.micro <= 0) out.push_back({"simulation.first_round_multiplier", "must be positive"});
  if (cfg.trials < 1) out.push_back({"simulation.trials", "must be >= 1"});
  return out;
}

std::string_view to_string(SimEventKind k) {
  switch (k) {
    case SimEventKind::deploy: return "deploy";
    case SimEventKind::round_start: return "round_start";
    case SimEventKind::round_end: return "round_end";
    case SimEventKind::checkpoint: return "checkpoint";
    case SimEventKind::revocation: return "revocation";
    case SimEventKind::replacement: return "replacement";
    case SimEventKind::recovery_complete: return "recovery_complete";
  }
  return "unknown";
}

std::optional<SimEventKind> parse_event_kind(std::string_view text) {
  for (auto k : {SimEventKind::deploy, SimEventKind::round_start, SimEventKind::round_end, SimEventKind::checkpoint,
                 SimEventKind::revocation, SimEventKind::replacement, SimEventKind::recovery_complete})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr Micros kNever{std::numeric_limits<std::int64_t>::max()};
constexpr std::int64_t kEventLimit = 10'000'000;

}  // namespace

std::mt19937_64 revocation_stream(std::uint64_t seed, const Task& task) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(fnv1a(task.to_string()))));
}

Micros draw_interarrival(Micros k_r, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return Micros{std::llround(-static_cast<double>(k_r.us) * std::log1p(-u))};
}

std::vector<Micros> sample_revocation_times(Micros k_r, Micros horizon, std::mt19937_64& rng) {
  if (k_r.us <= 0) throw std::invalid_argument("k_r must be positive");
  std::vector<Micros> out;
  Micros t{0};
  while (true) {
    t += draw_interarrival(k_r, rng);
    if (t >= horizon) break;
    out.push_back(t);
  }
  return out;
}

namespace {

struct TaskState {
  Task task;
  VmAddress vm;
  Pricing pricing = Pricing::on_demand;
  Micros started;
  Micros ready;
  Micros next_revocation = kNever;
  std::int64_t held_round = 0;  // clients: last aggregated round on local disk
  std::mt19937_64 rng;
};

struct PendingRecovery {
  Micros ready;
  Task task;
  VmAddress vm;
  std::int64_t round;
};

class Simulation {
 public:
  Simulation(const SchedulingSolution& mapping, const FlApplication& app, const MultiCloudEnv& env,
             const SlowdownTables& tables, const SimConfig& cfg)
      : app_(app), env_(env), tables_(tables), cfg_(cfg), norms_(mapping.norms), alpha_(mapping.alpha) {
    const PricingPlan plan = pricing_for(cfg.scenario);
    map_ = mapping.assignment;
    map_.pricing = plan;
    candidates_ = CandidateSet::initial(app, env, tables);
    tasks_.push_back(make_state(Task::server(), map_.server_vm, plan.server));
    for (const auto& [id, vm] : map_.client_vm) tasks_.push_back(make_state(Task::client(id), vm, plan.clients));
  }

  SimResult run() {
    for (const auto& ts : tasks_) log({Micros{0}, SimEventKind::deploy, ts.task, ts.vm, 0});
    while (completed_ < app_.n_rounds) {
      if (result_.events.size() > kEventLimit) throw Error("simulation exceeded the event limit");
      Micros start = now_;
      for (const auto& ts : tasks_) start = std::max(start, ts.ready);
      const std::int64_t round = completed_ + 1;
      const bool checkpoint = cfg_.checkpoint_interval && round % *cfg_.checkpoint_interval == 0;
      Micros duration = round_makespan(map_, app_, tables_, env_).makespan;
      if (round == 1) duration = scale(duration, cfg_.first_round_multiplier);
      if (checkpoint) duration += cfg_.checkpoint_save_time;
      duration += cfg_.client_checkpoint_time;
      const Micros end = start + duration;

      TaskState* victim = nullptr;
      for (auto& ts : tasks_)
        if (!victim || ts.next_revocation < victim->next_revocation) victim = &ts;
      if (victim && victim->next_revocation < end) {
        const Micros at = victim->next_revocation;
        if (at >= start) log({start, SimEventKind::round_start, std::nullopt, std::nullopt, round});
        now_ = at;
        revoke(*victim, at);
        continue;
      }

      log({start, SimEventKind::round_start, std::nullopt, std::nullopt, round});
      log({end, SimEventKind::round_end, std::nullopt, std::nullopt, round});
      if (checkpoint) {
        log({end, SimEventKind::checkpoint, Task::server(), map_.server_vm, round});
        checkpoint_round_ = round;
      }
      completed_ = round;
      if (cfg_.clients_keep_weights)
        for (auto& ts : tasks_)
          if (!ts.task.is_server()) ts.held_round = round;
      result_.message_cost += total_costs(map_, Micros{0}, app_, env_).comm;
      now_ = end;
    }
    finish(now_);
    return std::move(result_);
  }

 private:
  TaskState make_state(Task task, const VmAddress& vm, Pricing pricing) {
    TaskState ts;
    ts.task = std::move(task);
    ts.vm = vm;
    ts.pricing = pricing;
    ts.rng = revocation_stream(cfg_.seed, ts.task);
    if (cfg_.k_r && pricing == Pricing::spot) ts.next_revocation = draw_interarrival(*cfg_.k_r, ts.rng);
    return ts;
  }

  void log(SimEvent e) {
    std::stable_sort(pending_.begin(), pending_.end(), [](const auto& a, const auto& b) { return a.ready < b.ready; });
    while (!pending_.empty() && pending_.front().ready <= e.time) {
      const auto& p = pending_.front();
      result_.events.push_back({p.ready, SimEventKind::recovery_complete, p.task, p.vm, p.round});
      pending_.erase(pending_.begin());
    }
    result_.events.push_back(std::move(e));
  }

  void charge_until(const TaskState& ts, Micros until) {
    result_.vm_cost += charge(price_of(env_, ts.vm, ts.pricing), until - ts.started);
  }

  void finish(Micros end) {
    for (const auto& ts : tasks_) charge_until(ts, end);
    result_.total_time = end;
    result_.total_cost = result_.vm_cost + result_.message_cost;
    result_.rounds_completed = completed_;
    result_.final_map = map_;
  }

  void revoke(TaskState& ts, Micros at) {
    log({at, SimEventKind::revocation, ts.task, ts.vm, completed_});
    if (ts.task.is_server()) ++result_.revocations.server;
    else ++result_.revocations.clients;
    charge_until(ts, at);
    std::erase_if(pending_, [&](const auto& p) { return p.task == ts.task; });

    VmAddress next;
    try {
      next = select_replacement(ts.task, candidates_, ts.vm, map_, app_, tables_, env_, norms_, alpha_,
                                cfg_.revocation_policy);
    } catch (const UnrecoverableTask& e) {
      ts.started = at;  // already charged up to the revocation
      finish(at);
      throw SimulationAborted(e.what(), std::move(result_));
    }
    map_ = with_replacement(std::move(map_), ts.task, next);
    ts.vm = next;
    ts.started = at;
    ts.ready = at + cfg_.vm_prep_time;
    ts.next_revocation = at + draw_interarrival(*cfg_.k_r, ts.rng);
    log({at, SimEventKind::replacement, ts.task, next, completed_});

    if (ts.task.is_server()) {
      std::int64_t recovery = checkpoint_round_;
      for (const auto& other : tasks_)
        if (!other.task.is_server()) recovery = std::max(recovery, other.held_round);
      recovery = std::min(recovery, completed_);
      result_.rounds_re_executed += completed_ - recovery;
      completed_ = recovery;
    } else {
      ts.held_round = 0;  // the new VM starts with an empty disk
    }
    pending_.push_back({ts.ready, ts.task, next, completed_});
  }

  const FlApplication& app_;
  const MultiCloudEnv& env_;
  const SlowdownTables& tables_;
  const SimConfig& cfg_;
  NormalizationConstants norms_;
  Ratio alpha_;

  Assignment map_;
  CandidateSet candidates_;
  std::vector<TaskState> tasks_;
  std::vector<PendingRecovery> pending_;
  SimResult result_;
  Micros now_{0};
  std::int64_t completed_ = 0;
  std::int64_t checkpoint_round_ = 0;
};

}  // namespace

SimResult simulate(const SchedulingSolution& mapping, const FlApplication& app, const MultiCloudEnv& env,
                   const SlowdownTables& tables, const SimConfig& cfg) {
  if (auto v = validate_sim_config(cfg); !v.empty()) throw Error(v.front().path + ": " + v.front().message);
  return Simulation(mapping, app, env, tables, cfg).run();
}

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

std::vector<TrialOutcome> run_trials(const SchedulingSolution& mapping, const FlApplication& app,
                                     const MultiCloudEnv& env, const SlowdownTables& tables, const SimConfig& cfg) {
  std::vector<TrialOutcome> out;
  for (std::int64_t i = 0; i < cfg.trials; ++i) {
    SimConfig one = cfg;
    one.seed = trial_seed(cfg.seed, i);
    one.trials = 1;
    TrialOutcome o;
    try {
      o.result = simulate(mapping, app, env, tables, one);
    } catch (const SimulationAborted& e) {
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

TrialSummary aggregate_trials(const std::vector<SimResult>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate_trials needs at least one result");
  std::vector<double> rev, time, cost;
  for (const auto& r : results) {
    rev.push_back(static_cast<double>(r.revocations.total()));
    time.push_back(r.total_time.seconds());
    cost.push_back(r.total_cost.dollars());
  }
  return TrialSummary{static_cast<std::int64_t>(results.size()), stat_of(rev), stat_of(time), stat_of(cost)};
}

Difference compare(Micros t_candidate, Money c_candidate, Micros t_baseline, Money c_baseline) {
  if (t_baseline.us == 0 || c_baseline.ticks == 0) throw std::domain_error("baseline value is zero");
  return Difference{
      static_cast<double>(static_cast<long double>(t_baseline.us - t_candidate.us) / t_baseline.us),
      static_cast<double>(static_cast<long double>(c_baseline.ticks - c_candidate.ticks) / c_baseline.ticks),
  };
}

Difference compare(const SchedulingSolution& candidate, const SchedulingSolution& baseline) {
  return compare(candidate.makespan, candidate.costs.total, baseline.makespan, baseline.costs.total);
}

Difference compare(const SimResult& candidate, const SimResult& baseline) {
  return compare(candidate.total_time, candidate.total_cost, baseline.total_time, baseline.total_cost);
}

Money recompute_cost_from_log(const std::vector<SimEvent>& events, const FlApplication& app, const MultiCloudEnv& env,
                              PricingPlan pricing) {
  std::map<Task, std::pair<VmAddress, Micros>> alive;
  Assignment map;
  map.pricing = pricing;
  Money total{0};
  Micros last{0};
  auto role_price = [&](const Task& t, const VmAddress& vm) {
    return price_of(env, vm, t.is_server() ? pricing.server : pricing.clients);
  };
  for (const auto& e : events) {
    last = std::max(last, e.time);
    switch (e.kind) {
      case SimEventKind::deploy:
      case SimEventKind::replacement:
        alive[*e.task] = {*e.vm, e.time};
        if (e.task->is_server()) map.server_vm = *e.vm;
        else map.client_vm[e.task->client_id] = *e.vm;
        break;
      case SimEventKind::revocation: {
        auto it = alive.find(*e.task);
        if (it == alive.end()) throw Error("revocation of a task with no live VM in the event log");
        total += charge(role_price(*e.task, it->second.first), e.time - it->second.second);
        alive.erase(it);
        break;
      }
      case SimEventKind::round_end:
        total += total_costs(map, Micros{0}, app, env).comm;
        break;
      default:
        break;
    }
  }
  for (const auto& [task, vm_start] : alive) total += charge(role_price(task, vm_start.first), last - vm_start.second);
  return total;
}

std::string format_event(const SimEvent& e) {
  std::ostringstream os;
  os << format_seconds(e.time) << ' ' << to_string(e.kind) << ' ' << (e.task ? e.task->to_string() : "-") << ' '
     << (e.vm ? e.vm->to_string() : "-") << ' ' << e.round;
  return os.str();
}

SimEvent parse_event(std::string_view line) {
  std::istringstream is{std::string(line)};
  std::string time, kind, task, vm;
  std::int64_t round = 0;
  if (!(is >> time >> kind >> task >> vm >> round)) throw ParseError("event", "malformed line '" + std::string(line) + "'");
  SimEvent e;
  const auto dot = time.find('.');
  const bool neg = !time.empty() && time[0] == '-';
  std::int64_t whole = 0, frac = 0;
  const std::string w = time.substr(neg ? 1 : 0, dot == std::string::npos ? std::string::npos : dot - (neg ? 1 : 0));
  std::string f = dot == std::string::npos ? "0" : time.substr(dot + 1);
  f.resize(6, '0');
  if (std::from_chars(w.data(), w.data() + w.size(), whole).ec != std::errc{} ||
      std::from_chars(f.data(), f.data() + f.size(), frac).ec != std::errc{})
    throw ParseError("event.time", "bad time '" + time + "'");
  e.time = Micros{(neg ? -1 : 1) * (whole * kMicro + frac)};
  auto k = parse_event_kind(kind);
  if (!k) throw ParseError("event.kind", "unknown kind '" + kind + "'");
  e.kind = *k;
  if (task == "server") e.task = Task::server();
  else if (task.rfind("client:", 0) == 0) e.task = Task::client(task.substr(7));
  else if (task != "-") throw ParseError("event.task", "bad task '" + task + "'");
  if (vm != "-") {
    e.vm = VmAddress::parse(vm);
    if (!e.vm) throw ParseError("event.vm", "bad address '" + vm + "'");
  }
  e.round = round;
  return e;
}

}  // namespace fedsched
