#include "fedsched/bundle.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fedsched {

using json = nlohmann::ordered_json;

BundleInvalid::BundleInvalid(std::vector<Violation> v)
    : Error(v.empty() ? "invalid bundle" : v.front().path + ": " + v.front().message), violations(std::move(v)) {}

namespace {

// A JSON node together with its dotted path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }
  bool is_null() const { return j_.is_null(); }

  ParseError error(const std::string& msg) const { return ParseError(path_, msg); }

  Node at(const std::string& key) const {
    if (!j_.is_object()) throw error("expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) throw ParseError(child(key), "missing field");
    return Node(*it, child(key));
  }

  // Absent and null both read as nullopt.
  std::optional<Node> opt(const std::string& key) const {
    if (!j_.is_object()) throw error("expected an object");
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    return Node(*it, child(key));
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  double number() const {
    if (!j_.is_number()) throw error("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) throw error("expected a finite number");
    return v;
  }

  std::int64_t integer() const {
    if (!j_.is_number_integer()) throw error("expected an integer");
    return j_.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0))
      throw error("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }

  std::string str() const {
    if (!j_.is_string()) throw error("expected a string");
    return j_.get<std::string>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) throw error("expected true or false");
    return j_.get<bool>();
  }

  std::vector<Node> items() const {
    if (!j_.is_array()) throw error("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.emplace_back(j_[i], path_ + "[" + std::to_string(i) + "]");
    return out;
  }

  std::vector<std::pair<std::string, Node>> members() const {
    if (!j_.is_object()) throw error("expected an object");
    std::vector<std::pair<std::string, Node>> out;
    for (auto it = j_.begin(); it != j_.end(); ++it) out.emplace_back(it.key(), Node(it.value(), child(it.key())));
    return out;
  }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

Micros seconds_of(const Node& n) { return Micros::from_seconds(n.number()); }

Quota quota_of(const std::optional<Node>& n) {
  if (!n) return Quota::unbounded();
  if (n->raw().is_string()) {
    if (n->str() == "unbounded") return Quota::unbounded();
    throw n->error("expected an integer, null or \"unbounded\"");
  }
  return Quota::of(n->integer());
}

RegionKey region_of(const Node& n) {
  const std::string s = n.str();
  const auto slash = s.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == s.size() || s.find('/', slash + 1) != std::string::npos)
    throw n.error("expected \"provider/region\", got '" + s + "'");
  return RegionKey{s.substr(0, slash), s.substr(slash + 1)};
}

RegionPair pair_of(const Node& n) {
  const auto items = n.items();
  if (items.size() != 2) throw n.error("expected two regions");
  return RegionPair::of(region_of(items[0]), region_of(items[1]));
}

VmAddress vm_of(const Node& n, const MultiCloudEnv& env) {
  const std::string s = n.str();
  if (auto a = env.resolve(s)) return *a;
  throw n.error("unknown VM '" + s + "'");
}

Bytes size_of(const Node& parent, const std::string& stem) {
  if (auto b = parent.opt(stem + "_size_bytes")) return Bytes{b->integer()};
  return Bytes::from_gb(parent.at(stem + "_size_gb").number());
}

Pricing pricing_of(const Node& n) {
  if (auto p = parse_pricing(n.str())) return *p;
  throw n.error("expected \"on-demand\" or \"spot\"");
}

MultiCloudEnv read_env(const Node& n) {
  std::vector<ProviderSpec> providers;
  for (const auto& pn : n.at("providers").items()) {
    ProviderSpec p;
    p.id = pn.at("id").str();
    p.transfer_cost = TransferRate::from_dollars(pn.at("transfer_cost_per_gb").number());
    p.gpu_quota = quota_of(pn.opt("gpu_quota"));
    p.vcpu_quota = quota_of(pn.opt("vcpu_quota"));
    for (const auto& rn : pn.at("regions").items()) {
      RegionSpec r;
      r.id = rn.at("id").str();
      r.gpu_quota = quota_of(rn.opt("gpu_quota"));
      r.vcpu_quota = quota_of(rn.opt("vcpu_quota"));
      for (const auto& vn : rn.at("vm_types").items()) {
        VmTypeSpec v;
        v.id = vn.at("id").str();
        if (auto l = vn.opt("label")) v.label = l->str();
        v.vcpus = vn.at("vcpus").integer();
        v.gpus = vn.at("gpus").integer();
        v.on_demand = HourlyPrice::from_dollars(vn.at("on_demand_price_per_hour").number());
        if (auto s = vn.opt("spot_price_per_hour")) v.spot = HourlyPrice::from_dollars(s->number());
        v.aggregation_time = seconds_of(vn.at("aggregation_time_seconds"));
        r.vm_types.push_back(std::move(v));
      }
      p.regions.push_back(std::move(r));
    }
    providers.push_back(std::move(p));
  }
  return MultiCloudEnv(std::move(providers));
}

FlApplication read_app(const Node& n) {
  FlApplication app;
  app.n_rounds = n.at("n_rounds").integer();
  if (auto e = n.opt("epochs_per_round")) app.epochs_per_round = e->integer();
  app.budget = Money::from_dollars(n.at("budget_dollars").number());
  app.deadline = seconds_of(n.at("deadline_seconds"));
  app.alpha = Ratio::from_double(n.at("alpha").number());
  if (auto c = n.opt("baseline_comm_seconds")) {
    app.baseline_comm_time = seconds_of(*c);
  } else {
    app.baseline_comm_time =
        seconds_of(n.at("baseline_train_comm_seconds")) + seconds_of(n.at("baseline_test_comm_seconds"));
  }
  const Node m = n.at("messages");
  app.messages = MessageProfile{size_of(m, "server_train"), size_of(m, "server_aggreg"), size_of(m, "client_train"),
                                size_of(m, "client_test")};
  for (const auto& cn : n.at("clients").items()) {
    ClientSpec c;
    c.dataset_location = region_of(cn.at("dataset_location"));
    c.baseline_train = seconds_of(cn.at("baseline_train_seconds"));
    c.baseline_test = seconds_of(cn.at("baseline_test_seconds"));
    const std::int64_t count = cn.opt("count") ? cn.at("count").integer() : 1;
    if (count < 1) throw cn.at("count").error("must be >= 1");
    if (cn.has("id_prefix")) {
      const std::string prefix = cn.at("id_prefix").str();
      const std::int64_t first = cn.opt("first_index") ? cn.at("first_index").integer() : 1;
      for (std::int64_t i = 0; i < count; ++i) {
        c.id = prefix + std::to_string(first + i);
        app.clients.push_back(c);
      }
    } else {
      if (count != 1) throw cn.error("\"count\" needs \"id_prefix\"");
      c.id = cn.at("id").str();
      app.clients.push_back(std::move(c));
    }
  }
  return app;
}

void read_tables(const Node& n, const MultiCloudEnv& env, SlowdownTables& t) {
  if (auto b = n.opt("baseline_vm")) t.baseline_vm = vm_of(*b, env);
  if (auto b = n.opt("baseline_pair")) t.baseline_pair = pair_of(*b);
  if (auto exec = n.opt("exec")) {
    for (const auto& group : exec->items()) {
      std::optional<RegionKey> loc;
      if (auto l = group.opt("dataset_location")) loc = region_of(*l);
      for (const auto& [name, val] : group.at("values").members()) {
        const auto vm = env.resolve(name);
        if (!vm) throw val.error("unknown VM '" + name + "'");
        const Ratio sl = Ratio::from_double(val.number());
        if (loc) t.set_exec(*loc, *vm, sl);
        else t.set_exec(*vm, sl);
      }
    }
  }
  if (auto comm = n.opt("comm")) {
    for (const auto& row : comm->items()) t.set_comm(pair_of(row.at("regions")), Ratio::from_double(row.at("slowdown").number()));
  }
}

void read_measurements(const Node& n, const MultiCloudEnv& env, ScenarioBundle& b) {
  if (auto exec = n.opt("exec")) {
    for (const auto& group : exec->items()) {
      ExecMeasurementSet set;
      if (auto l = group.opt("dataset_location")) set.dataset_location = region_of(*l);
      set.baseline_vm = vm_of(group.at("baseline_vm"), env);
      for (const auto& row : group.at("rows").items()) {
        set.rows.push_back(ExecMeasurement{vm_of(row.at("vm"), env), seconds_of(row.at("round1_train_seconds")),
                                           seconds_of(row.at("round1_test_seconds")),
                                           seconds_of(row.at("round2_train_seconds")),
                                           seconds_of(row.at("round2_test_seconds"))});
      }
      b.exec_measurements.push_back(std::move(set));
    }
  }
  if (auto comm = n.opt("comm")) {
    CommMeasurementSet set;
    set.baseline_pair = pair_of(comm->at("baseline_pair"));
    for (const auto& row : comm->at("rows").items()) {
      const auto items = row.at("regions").items();
      if (items.size() != 2) throw row.at("regions").error("expected two regions");
      set.rows.push_back(CommMeasurement{RegionPair{region_of(items[0]), region_of(items[1])},
                                         seconds_of(row.at("train_seconds")), seconds_of(row.at("test_seconds"))});
    }
    b.comm_measurements = std::move(set);
  }
}

std::vector<NamedAssignment> read_fixed(const Node& n, const MultiCloudEnv& env, const FlApplication& app) {
  std::vector<NamedAssignment> out;
  for (const auto& an : n.items()) {
    NamedAssignment na;
    na.name = an.at("name").str();
    na.assignment.server_vm = vm_of(an.at("server"), env);
    if (auto p = an.opt("pricing")) na.assignment.pricing = PricingPlan::uniform(pricing_of(*p));
    std::optional<VmAddress> fallback;
    if (auto d = an.opt("client_default")) fallback = vm_of(*d, env);
    std::map<std::string, VmAddress> explicit_vms;
    if (auto cs = an.opt("clients")) {
      for (const auto& [id, vn] : cs->members()) explicit_vms.emplace(id, vm_of(vn, env));
    }
    for (const auto& c : app.clients) {
      if (auto it = explicit_vms.find(c.id); it != explicit_vms.end()) {
        na.assignment.client_vm.emplace(c.id, it->second);
        explicit_vms.erase(it);
      } else if (fallback) {
        na.assignment.client_vm.emplace(c.id, *fallback);
      } else {
        throw an.error("no VM for client '" + c.id + "' and no client_default");
      }
    }
    if (!explicit_vms.empty()) throw an.error("unknown client '" + explicit_vms.begin()->first + "'");
    out.push_back(std::move(na));
  }
  return out;
}

SimGrid read_sim(const Node& n) {
  SimGrid g;
  auto& c = g.base;
  if (auto k = n.opt("k_r_seconds")) {
    for (const auto& item : k->items())
      g.k_r_values.push_back(item.is_null() ? std::nullopt : std::optional<Micros>(seconds_of(item)));
  }
  if (g.k_r_values.empty()) g.k_r_values.push_back(std::nullopt);
  if (auto s = n.opt("scenarios")) {
    for (const auto& item : s->items()) {
      auto sc = parse_scenario(item.str());
      if (!sc) throw item.error("unknown scenario '" + item.str() + "'");
      g.scenarios.push_back(*sc);
    }
  }
  if (g.scenarios.empty()) g.scenarios.push_back(SimScenario::all_spot);
  c.k_r = g.k_r_values.front();
  c.scenario = g.scenarios.front();
  if (auto x = n.opt("checkpoint_interval_rounds")) c.checkpoint_interval = x->integer();
  if (auto x = n.opt("checkpoint_save_seconds")) c.checkpoint_save_time = seconds_of(*x);
  if (auto x = n.opt("client_checkpoint_seconds")) c.client_checkpoint_time = seconds_of(*x);
  if (auto x = n.opt("clients_keep_weights")) c.clients_keep_weights = x->boolean();
  if (auto x = n.opt("vm_prep_seconds")) c.vm_prep_time = seconds_of(*x);
  if (auto x = n.opt("first_round_multiplier")) c.first_round_multiplier = Ratio::from_double(x->number());
  if (auto x = n.opt("revocation_policy")) {
    auto p = parse_revocation_policy(x->str());
    if (!p) throw x->error("expected \"remove_type\" or \"retain_type\"");
    c.revocation_policy = *p;
  }
  if (auto x = n.opt("seed")) c.seed = x->unsigned_integer();
  if (auto x = n.opt("trials")) c.trials = x->integer();
  return g;
}

// Raw timings override tables; disagreements beyond 0.01 become warnings.
void apply_raw(ScenarioBundle& b) {
  if (b.exec_measurements.empty() && !b.comm_measurements) return;
  const SlowdownTables before = b.tables;
  apply_measurements(b.tables, b.exec_measurements, b.comm_measurements);
  constexpr std::int64_t kTolerance = 10'000;  // 0.01 in millionths
  for (const auto& [key, sl] : b.tables.exec_entries()) {
    auto it = before.exec_entries().find(key);
    if (it != before.exec_entries().end() && std::llabs(it->second.micro - sl.micro) > kTolerance)
      b.warnings.push_back({"slowdowns.exec." + (key.first ? key.first->to_string() + "." : std::string()) +
                                key.second.to_string(),
                            "table value " + std::to_string(it->second.value()) + " differs from measured " +
                                std::to_string(sl.value())});
  }
  for (const auto& [pair, sl] : b.tables.comm_entries()) {
    auto it = before.comm_entries().find(pair);
    if (it != before.comm_entries().end() && std::llabs(it->second.micro - sl.micro) > kTolerance)
      b.warnings.push_back({"slowdowns.comm." + pair.to_string(), "table value " + std::to_string(it->second.value()) +
                                                                      " differs from measured " +
                                                                      std::to_string(sl.value())});
  }
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

ScenarioBundle parse_bundle(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte)), e.what());
  }
  const Node root(doc, "");
  const auto version = root.at("format_version").integer();
  if (version != kBundleFormatVersion)
    throw root.at("format_version").error("unsupported format version " + std::to_string(version));

  ScenarioBundle b;
  if (auto nm = root.opt("name")) b.name = nm->str();
  b.env = read_env(root.at("environment"));
  b.app = read_app(root.at("application"));
  if (auto s = root.opt("slowdowns")) read_tables(*s, b.env, b.tables);
  if (auto m = root.opt("measurements")) read_measurements(*m, b.env, b);
  apply_raw(b);
  if (auto f = root.opt("fixed_assignments")) b.fixed_assignments = read_fixed(*f, b.env, b.app);
  if (auto s = root.opt("simulation")) b.sim = read_sim(*s);

  auto errors = validate_bundle(b);
  if (!errors.empty()) throw BundleInvalid(std::move(errors));
  validate_tables(b.tables, b.env, &b.warnings);
  return b;
}

ScenarioBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bundle(ss.str());
}

std::vector<Violation> validate_bundle(const ScenarioBundle& b) {
  auto out = validate_env(b.env);
  for (auto& v : validate_app(b.app, b.env)) out.push_back(std::move(v));
  for (auto& v : validate_tables(b.tables, b.env)) out.push_back(std::move(v));
  if (b.sim) {
    for (auto& v : validate_sim_config(b.sim->base)) out.push_back(std::move(v));
    for (const auto& k : b.sim->k_r_values)
      if (k && k->us <= 0) out.push_back({"simulation.k_r_seconds", "must be positive (or null to disable)"});
  }
  std::set<std::string> names;
  for (const auto& na : b.fixed_assignments)
    if (!names.insert(na.name).second) out.push_back({"fixed_assignments." + na.name, "duplicate name"});
  return out;
}

namespace {

json quota_json(const Quota& q) { return q.is_unbounded() ? json(nullptr) : json(q.limit()); }

double seconds_json(Micros t) { return static_cast<double>(t.us) / 1e6; }

std::string region_text(const RegionKey& k) { return k.to_string(); }

}  // namespace

std::string serialize_bundle(const ScenarioBundle& b) {
  json root;
  root["format_version"] = kBundleFormatVersion;
  root["name"] = b.name;

  json providers = json::array();
  for (const auto& p : b.env.providers()) {
    json pj;
    pj["id"] = p.id;
    pj["transfer_cost_per_gb"] = p.transfer_cost.dollars_per_gb();
    pj["gpu_quota"] = quota_json(p.gpu_quota);
    pj["vcpu_quota"] = quota_json(p.vcpu_quota);
    json regions = json::array();
    for (const auto& r : p.regions) {
      json rj;
      rj["id"] = r.id;
      rj["gpu_quota"] = quota_json(r.gpu_quota);
      rj["vcpu_quota"] = quota_json(r.vcpu_quota);
      json vms = json::array();
      for (const auto& v : r.vm_types) {
        json vj;
        vj["id"] = v.id;
        if (!v.label.empty()) vj["label"] = v.label;
        vj["vcpus"] = v.vcpus;
        vj["gpus"] = v.gpus;
        vj["on_demand_price_per_hour"] = v.on_demand.dollars_per_hour();
        if (v.spot) vj["spot_price_per_hour"] = v.spot->dollars_per_hour();
        vj["aggregation_time_seconds"] = seconds_json(v.aggregation_time);
        vms.push_back(std::move(vj));
      }
      rj["vm_types"] = std::move(vms);
      regions.push_back(std::move(rj));
    }
    pj["regions"] = std::move(regions);
    providers.push_back(std::move(pj));
  }
  root["environment"]["providers"] = std::move(providers);

  const auto& a = b.app;
  json app;
  app["n_rounds"] = a.n_rounds;
  app["epochs_per_round"] = a.epochs_per_round;
  app["budget_dollars"] = a.budget.dollars();
  app["deadline_seconds"] = seconds_json(a.deadline);
  app["alpha"] = a.alpha.value();
  app["baseline_comm_seconds"] = seconds_json(a.baseline_comm_time);
  app["messages"] = {{"server_train_size_bytes", a.messages.server_train.n},
                     {"server_aggreg_size_bytes", a.messages.server_aggreg.n},
                     {"client_train_size_bytes", a.messages.client_train.n},
                     {"client_test_size_bytes", a.messages.client_test.n}};
  json clients = json::array();
  for (const auto& c : a.clients) {
    clients.push_back({{"id", c.id},
                       {"dataset_location", region_text(c.dataset_location)},
                       {"baseline_train_seconds", seconds_json(c.baseline_train)},
                       {"baseline_test_seconds", seconds_json(c.baseline_test)}});
  }
  app["clients"] = std::move(clients);
  root["application"] = std::move(app);

  // Tables are written after raw measurements were applied, so they carry
  // the effective values; the raw rows are kept alongside for provenance.
  json sl;
  if (b.tables.baseline_vm) sl["baseline_vm"] = b.tables.baseline_vm->to_string();
  if (b.tables.baseline_pair)
    sl["baseline_pair"] = {region_text(b.tables.baseline_pair->first), region_text(b.tables.baseline_pair->second)};
  std::map<std::optional<RegionKey>, json> groups;
  for (const auto& [key, val] : b.tables.exec_entries()) groups[key.first][key.second.to_string()] = val.value();
  json exec = json::array();
  for (auto& [loc, values] : groups) {
    json g;
    g["dataset_location"] = loc ? json(region_text(*loc)) : json(nullptr);
    g["values"] = std::move(values);
    exec.push_back(std::move(g));
  }
  sl["exec"] = std::move(exec);
  json comm = json::array();
  for (const auto& [pair, val] : b.tables.comm_entries())
    comm.push_back({{"regions", {region_text(pair.first), region_text(pair.second)}}, {"slowdown", val.value()}});
  sl["comm"] = std::move(comm);
  root["slowdowns"] = std::move(sl);

  if (!b.exec_measurements.empty() || b.comm_measurements) {
    json m;
    json ex = json::array();
    for (const auto& set : b.exec_measurements) {
      json g;
      g["dataset_location"] = set.dataset_location ? json(region_text(*set.dataset_location)) : json(nullptr);
      g["baseline_vm"] = set.baseline_vm.to_string();
      json rows = json::array();
      for (const auto& r : set.rows)
        rows.push_back({{"vm", r.vm.to_string()},
                        {"round1_train_seconds", seconds_json(r.round1_train)},
                        {"round1_test_seconds", seconds_json(r.round1_test)},
                        {"round2_train_seconds", seconds_json(r.round2_train)},
                        {"round2_test_seconds", seconds_json(r.round2_test)}});
      g["rows"] = std::move(rows);
      ex.push_back(std::move(g));
    }
    m["exec"] = std::move(ex);
    if (b.comm_measurements) {
      json cm;
      cm["baseline_pair"] = {region_text(b.comm_measurements->baseline_pair.first),
                             region_text(b.comm_measurements->baseline_pair.second)};
      json rows = json::array();
      for (const auto& r : b.comm_measurements->rows)
        rows.push_back({{"regions", {region_text(r.pair.first), region_text(r.pair.second)}},
                        {"train_seconds", seconds_json(r.train_time)},
                        {"test_seconds", seconds_json(r.test_time)}});
      cm["rows"] = std::move(rows);
      m["comm"] = std::move(cm);
    }
    root["measurements"] = std::move(m);
  }

  json fixed = json::array();
  for (const auto& na : b.fixed_assignments) {
    json f;
    f["name"] = na.name;
    f["server"] = na.assignment.server_vm.to_string();
    f["pricing"] = std::string(to_string(na.assignment.pricing.clients));
    json cs = json::object();
    for (const auto& [id, vm] : na.assignment.client_vm) cs[id] = vm.to_string();
    f["clients"] = std::move(cs);
    fixed.push_back(std::move(f));
  }
  root["fixed_assignments"] = std::move(fixed);

  if (b.sim) {
    const auto& c = b.sim->base;
    json s;
    json ks = json::array();
    for (const auto& k : b.sim->k_r_values) ks.push_back(k ? json(seconds_json(*k)) : json(nullptr));
    s["k_r_seconds"] = std::move(ks);
    json sc = json::array();
    for (auto x : b.sim->scenarios) sc.push_back(std::string(to_string(x)));
    s["scenarios"] = std::move(sc);
    s["checkpoint_interval_rounds"] = c.checkpoint_interval ? json(*c.checkpoint_interval) : json(nullptr);
    s["checkpoint_save_seconds"] = seconds_json(c.checkpoint_save_time);
    s["client_checkpoint_seconds"] = seconds_json(c.client_checkpoint_time);
    s["clients_keep_weights"] = c.clients_keep_weights;
    s["vm_prep_seconds"] = seconds_json(c.vm_prep_time);
    s["first_round_multiplier"] = c.first_round_multiplier.value();
    s["revocation_policy"] = std::string(to_string(c.revocation_policy));
    s["seed"] = c.seed;
    s["trials"] = c.trials;
    root["simulation"] = std::move(s);
  }
  return root.dump(2) + "\n";
}

void save_bundle(const ScenarioBundle& b, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_bundle(b);
}

}  // namespace fedsched
