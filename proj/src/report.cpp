#include "fedsched/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fedsched {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + sep.size();
  }
  return out;
}

std::vector<std::string> words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::int64_t parse_i64(std::string_view s, std::string_view where) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError(std::string(where), "expected an integer, got '" + std::string(s) + "'");
  return v;
}

i128 parse_i128(std::string_view s, std::string_view where) {
  bool neg = false;
  std::size_t i = 0;
  if (!s.empty() && s[0] == '-') neg = true, i = 1;
  if (i == s.size()) throw ParseError(std::string(where), "expected an integer");
  i128 v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw ParseError(std::string(where), "expected an integer, got '" + std::string(s) + "'");
    v = mul_checked(v, 10) + (s[i] - '0');
  }
  return neg ? -v : v;
}

Micros parse_hms(std::string_view s, std::string_view where) {
  const auto parts = split(s, ":");
  if (parts.size() != 3) throw ParseError(std::string(where), "expected H:MM:SS, got '" + std::string(s) + "'");
  const auto h = parse_i64(parts[0], where), m = parse_i64(parts[1], where), sec = parse_i64(parts[2], where);
  return Micros{((h * 60 + m) * 60 + sec) * kMicro};
}

double parse_number(std::string_view s, std::string_view where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(std::string(where), "expected a number, got '" + std::string(s) + "'");
}

std::string stat_text(const Stat& s, int decimals) {
  char buf[64];
  if (s.sd) std::snprintf(buf, sizeof buf, "%.*f +- %.*f", decimals, s.mean, decimals, *s.sd);
  else std::snprintf(buf, sizeof buf, "%.*f", decimals, s.mean);
  return buf;
}

std::string hms_of_seconds(double s) { return format_hms(Micros::from_seconds(s)); }

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

}  // namespace

std::string describe_setup(const Assignment& a, const MultiCloudEnv& env) {
  std::map<std::string, int> counts;
  for (const auto& [id, vm] : a.client_vm) ++counts[env.display_name(vm)];
  std::string out = "server " + env.display_name(a.server_vm) + ", clients ";
  bool first = true;
  for (const auto& [name, n] : counts) {
    if (!first) out += " + ";
    out += std::to_string(n) + "x " + name;
    first = false;
  }
  return out;
}

MapReport cmd_map(const ScenarioBundle& bundle, std::optional<Ratio> alpha, Pricing pricing) {
  Problem problem = make_problem(bundle.app, bundle.env, bundle.tables, PricingPlan::uniform(pricing));
  if (alpha) problem.alpha = *alpha;

  MapReport report;
  report.scenario = bundle.name;
  auto result = solve(problem);
  report.nodes = result.nodes;
  report.infeasibility = std::move(result.infeasibility);
  report.optimal = std::move(result.solution);

  const auto norms = normalization(bundle.app, bundle.env, bundle.tables, problem.limits.deadline_per_round,
                                   problem.pricing);
  for (const auto& na : bundle.fixed_assignments) {
    Assignment a = na.assignment;
    a.pricing = problem.pricing;
    report.baselines.push_back({na.name, evaluate_fixed(problem, a, norms)});
  }

  if (report.optimal) {
    report.rows.push_back({bundle.name, "optimal: " + describe_setup(report.optimal->assignment, bundle.env),
                           report.optimal->makespan, report.optimal->costs.total, {}});
  }
  for (const auto& b : report.baselines) {
    ReportRow row{bundle.name, b.name + ": " + describe_setup(b.solution.assignment, bundle.env), b.solution.makespan,
                  b.solution.costs.total, {}};
    if (report.optimal) row.diffs.push_back({b.name, compare(*report.optimal, b.solution)});
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string format_percent(double fraction) {
  char buf[32];
  double pct = fraction * 100.0;
  if (std::fabs(pct) < 0.005) pct = 0.0;  // no "-0.00%"
  std::snprintf(buf, sizeof buf, "%.2f%%", pct);
  return buf;
}

std::string format_table(const std::vector<ReportRow>& rows) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"Scenario", "Setup", "Time", "Cost", "Diff vs baseline (time / cost)"});
  for (const auto& r : rows) {
    std::string diffs;
    for (const auto& d : r.diffs) {
      if (!diffs.empty()) diffs += "; ";
      diffs += d.baseline + ": " + format_percent(d.diff.time) + " / " + format_percent(d.diff.cost);
    }
    cells.push_back({r.scenario.empty() ? "-" : r.scenario, r.setup, format_hms(r.time), "$" + format_dollars(r.cost, 2),
                     diffs.empty() ? "-" : diffs});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& c : cells)
    for (std::size_t i = 0; i < 5; ++i) width[i] = std::max(width[i], c[i].size());

  std::string out;
  for (std::size_t row = 0; row < cells.size(); ++row) {
    std::string line;
    for (std::size_t i = 0; i < 5; ++i) {
      if (i) line += " | ";
      line += i == 4 ? cells[row][i] : pad(cells[row][i], width[i]);
    }
    out += line + "\n";
    if (row == 0) {
      std::string rule;
      for (std::size_t i = 0; i < 5; ++i) {
        if (i) rule += "-+-";
        rule += std::string(i == 4 ? cells[0][4].size() : width[i], '-');
      }
      out += rule + "\n";
    }
  }
  return out;
}

std::vector<ReportRow> parse_table(std::string_view text) {
  std::vector<ReportRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n <= 2 || trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(n);
    const auto cols = split(line, " | ");
    if (cols.size() != 5) throw ParseError(where, "expected 5 columns");
    ReportRow r;
    r.scenario = cols[0] == "-" ? "" : cols[0];
    r.setup = cols[1];
    r.time = parse_hms(cols[2], where);
    if (cols[3].empty() || cols[3][0] != '$') throw ParseError(where, "expected a $ amount");
    r.cost = Money::from_dollars(parse_number(cols[3].substr(1), where));
    if (cols[4] != "-") {
      for (const auto& item : split(cols[4], "; ")) {
        const auto colon = item.rfind(": ");
        if (colon == std::string::npos) throw ParseError(where, "malformed difference '" + item + "'");
        const auto pcts = split(std::string_view(item).substr(colon + 2), " / ");
        if (pcts.size() != 2) throw ParseError(where, "malformed difference '" + item + "'");
        auto pct = [&](const std::string& p) {
          if (p.empty() || p.back() != '%') throw ParseError(where, "expected a percentage");
          return parse_number(std::string_view(p).substr(0, p.size() - 1), where) / 100.0;
        };
        r.diffs.push_back({item.substr(0, colon), Difference{pct(pcts[0]), pct(pcts[1])}});
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

SolutionRecord to_record(std::string name, std::string scenario, const SchedulingSolution& s) {
  return {std::move(name), std::move(scenario), s.assignment, s.makespan, s.costs, s.norms,
          s.alpha, s.objective_numerator, s.violations};
}

std::vector<SolutionRecord> records_of(const MapReport& report) {
  std::vector<SolutionRecord> out;
  if (report.optimal) out.push_back(to_record("optimal", report.scenario, *report.optimal));
  for (const auto& b : report.baselines) out.push_back(to_record(b.name, report.scenario, b.solution));
  return out;
}

std::string format_records(const std::vector<SolutionRecord>& records) {
  std::ostringstream out;
  out << "fedsched-solution " << kSolutionFormatVersion << "\n";
  for (const auto& r : records) {
    out << "solution " << r.name << "\n";
    if (!r.scenario.empty()) out << "scenario " << r.scenario << "\n";
    out << "alpha_micro " << r.alpha.micro << "\n";
    out << "makespan_us " << r.makespan.us << "\n";
    out << "cost_vm_ticks " << to_string(r.costs.vm.ticks) << "\n";
    out << "cost_comm_ticks " << to_string(r.costs.comm.ticks) << "\n";
    out << "cost_total_ticks " << to_string(r.costs.total.ticks) << "\n";
    out << "t_max_us " << r.norms.t_max.us << "\n";
    out << "cost_max_ticks " << to_string(r.norms.cost_max.ticks) << "\n";
    out << "objective_numerator " << to_string(r.objective_numerator) << "\n";
    out << "server " << r.assignment.server_vm.to_string() << " " << to_string(r.assignment.pricing.server) << "\n";
    for (const auto& [id, vm] : r.assignment.client_vm)
      out << "client " << id << " " << vm.to_string() << " " << to_string(r.assignment.pricing.clients) << "\n";
    for (const auto& v : r.violations) out << "violation " << to_string(v.kind) << " " << v.detail << "\n";
    out << "end\n";
  }
  return out.str();
}

namespace {

std::optional<ConstraintKind> parse_constraint_kind(std::string_view s) {
  for (auto k : {ConstraintKind::budget, ConstraintKind::deadline, ConstraintKind::provider_gpu,
                 ConstraintKind::provider_vcpu, ConstraintKind::region_gpu, ConstraintKind::region_vcpu})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

}  // namespace

std::vector<SolutionRecord> parse_records(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  auto where = [&] { return "line " + std::to_string(n); };

  if (!std::getline(in, line)) throw ParseError("line 1", "empty input");
  ++n;
  const auto header = words(line);
  if (header.size() != 2 || header[0] != "fedsched-solution") throw ParseError(where(), "not a solution file");
  if (parse_i64(header[1], where()) != kSolutionFormatVersion)
    throw ParseError(where(), "unsupported format version " + header[1]);

  std::vector<SolutionRecord> out;
  std::optional<SolutionRecord> cur;
  auto address = [&](const std::string& s) {
    auto a = VmAddress::parse(s);
    if (!a) throw ParseError(where(), "malformed VM address '" + s + "'");
    return *a;
  };
  auto pricing = [&](const std::string& s) {
    auto p = parse_pricing(s);
    if (!p) throw ParseError(where(), "unknown pricing '" + s + "'");
    return *p;
  };
  while (std::getline(in, line)) {
    ++n;
    const auto w = words(line);
    if (w.empty()) continue;
    const std::string& key = w[0];
    if (key == "solution") {
      if (cur) throw ParseError(where(), "missing 'end'");
      if (w.size() != 2) throw ParseError(where(), "expected 'solution <name>'");
      cur.emplace();
      cur->name = w[1];
      continue;
    }
    if (!cur) throw ParseError(where(), "'" + key + "' outside a solution block");
    if (key == "end") {
      out.push_back(std::move(*cur));
      cur.reset();
      continue;
    }
    if (key == "violation") {
      if (w.size() < 2) throw ParseError(where(), "expected 'violation <kind> <detail>'");
      auto k = parse_constraint_kind(w[1]);
      if (!k) throw ParseError(where(), "unknown constraint '" + w[1] + "'");
      const auto pos = line.find(w[1]) + w[1].size();
      cur->violations.push_back({*k, trim(std::string_view(line).substr(pos))});
      continue;
    }
    if (key == "client") {
      if (w.size() != 4) throw ParseError(where(), "expected 'client <id> <vm> <pricing>'");
      cur->assignment.client_vm[w[1]] = address(w[2]);
      cur->assignment.pricing.clients = pricing(w[3]);
      continue;
    }
    if (key == "server") {
      if (w.size() != 3) throw ParseError(where(), "expected 'server <vm> <pricing>'");
      cur->assignment.server_vm = address(w[1]);
      cur->assignment.pricing.server = pricing(w[2]);
      continue;
    }
    if (w.size() != 2) throw ParseError(where(), "expected '" + key + " <value>'");
    const std::string& v = w[1];
    if (key == "scenario") cur->scenario = v;
    else if (key == "alpha_micro") cur->alpha = Ratio{parse_i64(v, where())};
    else if (key == "makespan_us") cur->makespan = Micros{parse_i64(v, where())};
    else if (key == "cost_vm_ticks") cur->costs.vm = Money{parse_i128(v, where())};
    else if (key == "cost_comm_ticks") cur->costs.comm = Money{parse_i128(v, where())};
    else if (key == "cost_total_ticks") cur->costs.total = Money{parse_i128(v, where())};
    else if (key == "t_max_us") cur->norms.t_max = Micros{parse_i64(v, where())};
    else if (key == "cost_max_ticks") cur->norms.cost_max = Money{parse_i128(v, where())};
    else if (key == "objective_numerator") cur->objective_numerator = parse_i128(v, where());
    else throw ParseError(where(), "unknown key '" + key + "'");
  }
  if (cur) throw ParseError(where(), "missing 'end'");
  return out;
}

SolutionRecord load_record(std::string_view ref) {
  const auto hash = ref.rfind('#');
  const std::string path(ref.substr(0, hash));
  const std::string name = hash == std::string_view::npos ? "optimal" : std::string(ref.substr(hash + 1));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  for (auto& r : parse_records(ss.str()))
    if (r.name == name) return r;
  throw ParseError(path, "no solution named '" + name + "'");
}

SimReport cmd_simulate(const ScenarioBundle& bundle, const SimOverrides& overrides) {
  SimGrid grid = bundle.sim.value_or(SimGrid{});
  if (!overrides.k_r_values.empty()) grid.k_r_values = overrides.k_r_values;
  if (!overrides.scenarios.empty()) grid.scenarios = overrides.scenarios;
  if (grid.k_r_values.empty()) grid.k_r_values.push_back(std::nullopt);
  if (grid.scenarios.empty()) grid.scenarios.push_back(SimScenario::all_spot);
  if (overrides.trials) grid.base.trials = *overrides.trials;
  if (overrides.seed) grid.base.seed = *overrides.seed;

  const Problem problem = make_problem(bundle.app, bundle.env, bundle.tables);
  auto solved = solve(problem);
  if (!solved.solution) {
    std::string msg = "no feasible initial mapping";
    for (const auto& v : solved.infeasibility) msg += "; " + std::string(to_string(v.kind)) + ": " + v.detail;
    throw Error(msg);
  }

  SimReport report;
  report.scenario = bundle.name;
  report.mapping = *solved.solution;
  for (auto scenario : grid.scenarios) {
    for (const auto& k_r : grid.k_r_values) {
      SimCell cell;
      cell.scenario = scenario;
      cell.k_r = k_r;
      cell.config = grid.base;
      cell.config.scenario = scenario;
      cell.config.k_r = k_r;
      auto errors = validate_sim_config(cell.config);
      if (!errors.empty()) throw BundleInvalid(std::move(errors));
      cell.trials = run_trials(report.mapping, bundle.app, bundle.env, bundle.tables, cell.config);
      std::vector<SimResult> done;
      for (const auto& t : cell.trials) {
        if (t.result) done.push_back(*t.result);
        else ++cell.aborted;
      }
      cell.summary = aggregate_trials(done);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string format_sim_report(const SimReport& r) {
  std::ostringstream out;
  out << "scenario: " << (r.scenario.empty() ? "-" : r.scenario) << "\n";
  out << "initial mapping: " << "makespan " << format_hms(r.mapping.makespan) << ", cost per round $"
      << format_dollars(r.mapping.costs.total, 4) << "\n";
  out << "  server " << r.mapping.assignment.server_vm.to_string() << "\n";
  for (const auto& [id, vm] : r.mapping.assignment.client_vm) out << "  client " << id << " " << vm.to_string() << "\n";
  out << "\n";

  std::vector<std::array<std::string, 7>> cells;
  cells.push_back({"Pricing", "k_r (s)", "Trials", "Aborted", "Revocations", "Avg exec. time", "Avg total cost ($)"});
  for (const auto& c : r.cells) {
    const std::int64_t done = c.summary.trials;
    std::string time = "-", cost = "-", revs = "-";
    if (done > 0) {
      revs = stat_text(c.summary.revocations, 2);
      time = hms_of_seconds(c.summary.time_seconds.mean);
      if (c.summary.time_seconds.sd) time += " +- " + hms_of_seconds(*c.summary.time_seconds.sd);
      cost = stat_text(c.summary.cost_dollars, 2);
    }
    cells.push_back({std::string(to_string(c.scenario)), c.k_r ? std::to_string(c.k_r->us / kMicro) : "none",
                     std::to_string(static_cast<std::int64_t>(c.trials.size())), std::to_string(c.aborted), revs,
                     time, cost});
  }
  std::array<std::size_t, 7> width{};
  for (const auto& row : cells)
    for (std::size_t i = 0; i < 7; ++i) width[i] = std::max(width[i], row[i].size());
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t i = 0; i < 7; ++i) line += (i ? "  " : "") + pad(row[i], width[i]);
    out << trim(line) << "\n";
  }
  for (const auto& c : r.cells) {
    for (std::size_t i = 0; i < c.trials.size(); ++i)
      if (!c.trials[i].result)
        out << "trial " << i << " (" << to_string(c.scenario) << ", k_r "
            << (c.k_r ? format_seconds(*c.k_r) : std::string("none")) << ") aborted: " << c.trials[i].error << "\n";
  }
  return out.str();
}

std::string format_event_logs(const SimReport& r) {
  std::string out;
  for (const auto& c : r.cells) {
    for (std::size_t i = 0; i < c.trials.size(); ++i) {
      out += "# " + std::string(to_string(c.scenario)) + " " + (c.k_r ? format_seconds(*c.k_r) : "none") + " " +
             std::to_string(i) + "\n";
      if (!c.trials[i].result) continue;
      for (const auto& e : c.trials[i].result->events) out += format_event(e) + "\n";
    }
  }
  return out;
}

ValidationReport cmd_validate(const std::filesystem::path& path) {
  ValidationReport rep;
  try {
    auto b = load_bundle(path);
    rep.warnings = std::move(b.warnings);
  } catch (const BundleInvalid& e) {
    rep.exit_code = kExitInvalid;
    rep.errors = e.violations;
  } catch (const ParseError& e) {
    rep.exit_code = kExitParse;
    rep.errors.push_back({e.where, std::string(e.what()).substr(e.where.size() + 2)});
  }
  return rep;
}

}  // namespace fedsched
