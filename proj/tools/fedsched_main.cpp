#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fedsched/report.hpp"

using namespace fedsched;

namespace {

void print_violations(const std::vector<Violation>& vs, const char* tag) {
  for (const auto& v : vs) std::cerr << tag << ": " << v.path << ": " << v.message << "\n";
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  out << text;
  return true;
}

int run_validate(const std::string& path) {
  const auto rep = cmd_validate(path);
  print_violations(rep.errors, "error");
  print_violations(rep.warnings, "warning");
  if (rep.exit_code == kExitOk) std::cout << path << ": ok\n";
  return rep.exit_code;
}

int run_map(const std::string& path, std::optional<double> alpha, const std::string& pricing_text,
            const std::string& out_path) {
  const auto pricing = parse_pricing(pricing_text);
  if (!pricing) {
    std::cerr << "error: unknown pricing '" << pricing_text << "'\n";
    return kExitInvalid;
  }
  const auto bundle = load_bundle(path);
  print_violations(bundle.warnings, "warning");
  std::optional<Ratio> a;
  if (alpha) {
    if (*alpha < 0.0 || *alpha > 1.0) {
      std::cerr << "error: alpha must lie in [0, 1]\n";
      return kExitInvalid;
    }
    a = Ratio::from_double(*alpha);
  }
  const auto report = cmd_map(bundle, a, *pricing);
  std::cout << format_table(report.rows);
  if (!out_path.empty() && !write_file(out_path, format_records(records_of(report)))) return kExitInvalid;
  if (!report.optimal) {
    std::cerr << "infeasible:\n";
    for (const auto& v : report.infeasibility) std::cerr << "  " << to_string(v.kind) << ": " << v.detail << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int run_simulate(const std::string& path, const std::vector<double>& k_r, const std::vector<std::string>& scenarios,
                 std::optional<std::int64_t> trials, std::optional<std::uint64_t> seed, const std::string& events) {
  const auto bundle = load_bundle(path);
  print_violations(bundle.warnings, "warning");
  SimOverrides o;
  for (double k : k_r) o.k_r_values.push_back(k > 0 ? std::optional<Micros>(Micros::from_seconds(k)) : std::nullopt);
  for (const auto& s : scenarios) {
    auto sc = parse_scenario(s);
    if (!sc) {
      std::cerr << "error: unknown scenario '" << s << "'\n";
      return kExitInvalid;
    }
    o.scenarios.push_back(*sc);
  }
  o.trials = trials;
  o.seed = seed;
  const auto report = cmd_simulate(bundle, o);
  std::cout << format_sim_report(report);
  if (!events.empty() && !write_file(events, format_event_logs(report))) return kExitInvalid;
  return kExitOk;
}

int run_compare(const std::string& a_ref, const std::string& b_ref) {
  const auto a = load_record(a_ref);
  const auto b = load_record(b_ref);
  const auto d = compare(a.makespan, a.costs.total, b.makespan, b.costs.total);
  std::cout << a.name << ": " << format_hms(a.makespan) << " / $" << format_dollars(a.costs.total, 2) << "\n";
  std::cout << b.name << ": " << format_hms(b.makespan) << " / $" << format_dollars(b.costs.total, 2) << "\n";
  std::cout << "difference (time / cost): " << format_percent(d.time) << " / " << format_percent(d.cost) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cloud VM selection and failure simulation for federated learning"};
  app.require_subcommand(1);

  std::string bundle_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario bundle");
  validate->add_option("bundle", bundle_path, "Scenario bundle")->required();

  std::optional<double> alpha;
  std::string pricing = "on-demand", out_path;
  auto* map = app.add_subcommand("map", "Compute the initial mapping and score the fixed baselines");
  map->add_option("bundle", bundle_path, "Scenario bundle")->required();
  map->add_option("--alpha", alpha, "Cost weight in [0, 1]");
  map->add_option("--pricing", pricing, "on-demand or spot");
  map->add_option("--out", out_path, "Write solution records here");

  std::vector<double> k_r;
  std::vector<std::string> scenarios;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::string events;
  auto* sim = app.add_subcommand("simulate", "Run revocation trials over the simulation grid");
  sim->add_option("bundle", bundle_path, "Scenario bundle")->required();
  sim->add_option("--k-r", k_r, "Mean seconds between revocations (0 disables); repeatable");
  sim->add_option("--scenario", scenarios, "all_spot, server_on_demand_clients_spot (or server_on_demand), all_on_demand; repeatable");
  sim->add_option("--trials", trials, "Trials per grid cell")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Base seed");
  sim->add_option("--events", events, "Write every trial's event log here");

  std::string sol_a, sol_b;
  auto* cmp = app.add_subcommand("compare", "Relative difference of two stored solutions (file#name)");
  cmp->add_option("candidate", sol_a)->required();
  cmp->add_option("baseline", sol_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*validate) return run_validate(bundle_path);
    if (*map) return run_map(bundle_path, alpha, pricing, out_path);
    if (*sim) return run_simulate(bundle_path, k_r, scenarios, trials, seed, events);
    if (*cmp) return run_compare(sol_a, sol_b);
  } catch (const BundleInvalid& e) {
    print_violations(e.violations, "error");
    return kExitInvalid;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
