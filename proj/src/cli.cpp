#include "occow/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include "occow/analytic_generic.hpp"
#include "occow/analytic_star.hpp"
#include "occow/optimizer.hpp"
#include "occow/simulator.hpp"

namespace occow::cli {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ScenarioParseError(key + ": not a number: '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ScenarioParseError(key + ": not an integer: '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ScenarioParseError(key + ": not a boolean: '" + v + "'");
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

ScenarioConfig parse_scenario(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioParseError("line " + std::to_string(lineno) + ": expected key=value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k.empty()) throw ScenarioParseError("line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(k, v).second) throw ScenarioParseError("line " + std::to_string(lineno) + ": duplicate key " + k);
  }

  auto take = [&](const char* k) -> std::optional<std::string> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  ScenarioConfig c = make_star(30, Protocol::fixed_2hop);
  c.phases = PhasePlan{};
  double snr_db = 10.0;

  if (auto v = take("kind")) {
    auto k = parse_topology(*v);
    if (!k) throw ScenarioParseError("kind: unknown topology '" + *v + "'");
    c.topology.kind = *k;
  }
  if (auto v = take("n_nodes")) c.topology.n_nodes = to_int("n_nodes", *v);
  c.topology.n_streams = 2 * c.topology.n_nodes;
  c.topology.avg_subscribers = 1;
  if (auto v = take("n_streams")) c.topology.n_streams = to_int("n_streams", *v);
  if (auto v = take("avg_subscribers")) c.topology.avg_subscribers = to_int("avg_subscribers", *v);
  if (auto v = take("snr_db")) snr_db = to_double("snr_db", *v);
  if (auto v = take("bandwidth_hz")) c.channel.bandwidth_hz = to_double("bandwidth_hz", *v);
  c.channel = ChannelParams::from_db(snr_db, c.channel.bandwidth_hz);
  if (auto v = take("message_bits")) c.message_bits = to_double("message_bits", *v);
  if (auto v = take("cycle_time_s")) c.cycle_time_s = to_double("cycle_time_s", *v);
  if (auto v = take("protocol")) {
    auto p = parse_protocol(*v);
    if (!p) throw ScenarioParseError("protocol: unknown protocol '" + *v + "'");
    c.protocol = *p;
  }

  const int h = std::max(1, hop_count(c.protocol));
  const char* dk[3] = {"f_D1", "f_D2", "f_D3"};
  const char* uk[3] = {"f_U1", "f_U2", "f_U3"};
  bool any_d = false, any_u = false;
  std::array<double, 3> d{}, u{};
  for (int i = 0; i < 3; ++i) {
    if (auto v = take(dk[i])) d[static_cast<std::size_t>(i)] = to_double(dk[i], *v), any_d = true;
    if (auto v = take(uk[i])) u[static_cast<std::size_t>(i)] = to_double(uk[i], *v), any_u = true;
  }
  c.phases.downlink = any_d ? d : even_split(h);
  c.phases.uplink = any_u ? u : even_split(h);
  if (auto v = take("f_S")) c.phases.scheduling = to_double("f_S", *v);
  c.phases.downlink_budget_s = c.phases.uplink_budget_s = 0;
  if (auto v = take("downlink_budget_s")) c.phases.downlink_budget_s = to_double("downlink_budget_s", *v);
  if (auto v = take("uplink_budget_s")) c.phases.uplink_budget_s = to_double("uplink_budget_s", *v);
  apply_default_budgets(c);

  if (auto v = take("relays")) c.knobs.relays = to_int("relays", *v);
  if (auto v = take("hops")) c.knobs.hops = to_int("hops", *v);
  if (auto v = take("subchannels")) c.knobs.subchannels = to_int("subchannels", *v);
  if (auto v = take("duty_pct")) c.knobs.duty_pct = to_double("duty_pct", *v);
  if (auto v = take("scheduling_overhead")) c.scheduling_overhead = to_bool("scheduling_overhead", *v);
  if (auto v = take("ack_bit")) c.ack_bit = to_bool("ack_bit", *v);
  if (auto v = take("ideal_scheduling")) c.ideal_scheduling = to_bool("ideal_scheduling", *v);
  if (auto v = take("three_hop_acks")) c.three_hop_acks = to_bool("three_hop_acks", *v);

  if (!kv.empty()) throw ScenarioParseError("unknown key: " + kv.begin()->first);
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("cannot read scenario file " + path);
  return parse_scenario(in);
}

std::vector<std::pair<std::string, std::string>> scenario_fields(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("kind", std::string(to_string(c.topology.kind)));
  f.emplace_back("n_nodes", std::to_string(c.topology.n_nodes));
  f.emplace_back("n_streams", std::to_string(c.topology.n_streams));
  f.emplace_back("avg_subscribers", std::to_string(c.topology.avg_subscribers));
  f.emplace_back("snr_db", num(c.channel.snr_db()));
  f.emplace_back("bandwidth_hz", num(c.channel.bandwidth_hz));
  f.emplace_back("message_bits", num(c.message_bits));
  f.emplace_back("cycle_time_s", num(c.cycle_time_s));
  f.emplace_back("protocol", std::string(to_string(c.protocol)));
  const char* dk[3] = {"f_D1", "f_D2", "f_D3"};
  const char* uk[3] = {"f_U1", "f_U2", "f_U3"};
  for (std::size_t i = 0; i < 3; ++i) f.emplace_back(dk[i], num(c.phases.downlink[i]));
  for (std::size_t i = 0; i < 3; ++i) f.emplace_back(uk[i], num(c.phases.uplink[i]));
  f.emplace_back("f_S", num(c.phases.scheduling));
  f.emplace_back("downlink_budget_s", num(c.phases.downlink_budget_s));
  f.emplace_back("uplink_budget_s", num(c.phases.uplink_budget_s));
  if (c.knobs.relays) f.emplace_back("relays", std::to_string(*c.knobs.relays));
  if (c.knobs.hops) f.emplace_back("hops", std::to_string(*c.knobs.hops));
  if (c.knobs.subchannels) f.emplace_back("subchannels", std::to_string(*c.knobs.subchannels));
  if (c.knobs.duty_pct) f.emplace_back("duty_pct", num(*c.knobs.duty_pct));
  f.emplace_back("scheduling_overhead", bool_text(c.scheduling_overhead));
  f.emplace_back("ack_bit", bool_text(c.ack_bit));
  f.emplace_back("ideal_scheduling", bool_text(c.ideal_scheduling));
  f.emplace_back("three_hop_acks", bool_text(c.three_hop_acks));
  return f;
}

std::string format_scenario(const ScenarioConfig& cfg) {
  std::ostringstream os;
  for (auto& [k, v] : scenario_fields(cfg)) os << k << '=' << v << '\n';
  return os.str();
}

namespace {

using Cell = std::variant<std::monostate, double, long long, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Options {
  std::string scenario;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  double grid_step = 0.02;
  std::vector<double> bracket_db;
  double target = 1e-9;
  std::optional<double> tolerance_db;
  bool ideal_scheduling = false;
  std::optional<bool> appendix_overheads;
  std::string trace;
  unsigned threads = 0;

  int n_min = 2, n_max = 40;
  std::vector<std::string> schemes;
  std::optional<int> r_min, r_max;
  std::vector<int> hops{1, 2, 3};
  double background_db = 10.0;
  double duty_step = 2.0;
  std::string side = "both";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SnrSearchSpec search_spec(const Options& o, double default_high, double default_tol) {
  SnrSearchSpec s;
  s.target = o.target;
  s.high_db = default_high;
  if (!o.bracket_db.empty()) {
    s.low_db = o.bracket_db[0];
    s.high_db = o.bracket_db[1];
  }
  s.tolerance_db = o.tolerance_db.value_or(default_tol);
  return s;
}

std::string cell_text(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double d) const { return num(d); }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(bool b) const { return bool_text(b); }
  };
  return std::visit(V{}, c);
}

nlohmann::json cell_json(const Cell& c) {
  struct V {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double d) const {
      if (std::isfinite(d)) return d;
      return num(d);
    }
    nlohmann::json operator()(long long i) const { return i; }
    nlohmann::json operator()(const std::string& s) const { return s; }
    nlohmann::json operator()(bool b) const { return b; }
  };
  return std::visit(V{}, c);
}

std::vector<std::pair<std::string, std::string>> run_fields(const std::string& command, const Options& o,
                                                            const SnrSearchSpec* spec) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("command", command);
  if (o.seed) f.emplace_back("seed", std::to_string(*o.seed));
  if (o.trials) f.emplace_back("trials", std::to_string(*o.trials));
  if (spec) {
    f.emplace_back("target", num(spec->target));
    f.emplace_back("bracket_low_db", num(spec->low_db));
    f.emplace_back("bracket_high_db", num(spec->high_db));
    f.emplace_back("tolerance_db", num(spec->tolerance_db));
  }
  return f;
}

void emit(std::ostream& os, const std::string& format, const std::vector<std::pair<std::string, std::string>>& run,
          const ScenarioConfig& cfg, const Table& t) {
  if (format == "json") {
    nlohmann::json j;
    j["format"] = "occow-result";
    j["version"] = 1;
    nlohmann::json r = nlohmann::json::object();
    for (auto& [k, v] : run) r[k] = v;
    j["run"] = r;
    nlohmann::json c = nlohmann::json::object();
    for (auto& [k, v] : scenario_fields(cfg)) c[k] = v;
    j["config"] = c;
    j["columns"] = t.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (auto& row : t.rows) {
      nlohmann::json o = nlohmann::json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) o[t.columns[i]] = cell_json(row[i]);
      rows.push_back(o);
    }
    j["rows"] = rows;
    os << j.dump(2) << '\n';
    return;
  }
  os << "# occow-result v1\n";
  for (auto& [k, v] : run) os << "# " << k << '=' << v << '\n';
  for (auto& [k, v] : scenario_fields(cfg)) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

Cell opt_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }
Cell opt_cell(const std::optional<int>& v) { return v ? Cell{static_cast<long long>(*v)} : Cell{}; }

bool star_relaying(const ScenarioConfig& c) {
  return c.topology.kind == TopologyKind::star && hop_count(c.protocol) >= 1;
}

void require_mc(const Options& o) {
  if (!o.seed) throw UsageError("--seed is required for this command");
  if (!o.trials || *o.trials == 0) throw UsageError("--trials (>= 1) is required for this command");
}

Table cmd_analyze(const ScenarioConfig& cfg) {
  Table t;
  if (star_relaying(cfg)) {
    auto b = star_cycle_failure(cfg);
    t.columns = {"p_downlink", "p_uplink", "p_scheduling", "p_cycle_bound"};
    t.rows.push_back({b.p_downlink, b.p_uplink, b.p_scheduling, b.p_cycle_bound});
  } else {
    auto p = generic_failure(cfg);
    t.columns = {"p_cycle_bound", "log_p"};
    t.rows.push_back({p.p, p.log_p});
  }
  return t;
}

Table cmd_simulate(const ScenarioConfig& cfg, const Options& o) {
  require_mc(o);
  if (!o.trace.empty()) {
    std::ofstream tr(o.trace);
    if (!tr) throw UsageError("cannot write trace file " + o.trace);
    simulate_trial(cfg, *o.seed, 0, &tr);
  }
  auto c = count_failures(cfg, *o.trials, *o.seed, FailureEvent::cycle, o.threads);
  double p = static_cast<double>(c.failures) / static_cast<double>(c.trials);
  Table t;
  t.columns = {"event", "failures", "trials", "p_hat", "ci_halfwidth"};
  t.rows.push_back({std::string("cycle"), static_cast<long long>(c.failures), static_cast<long long>(c.trials), p,
                    wilson_halfwidth(c.failures, c.trials)});
  return t;
}

Table cmd_validate(const ScenarioConfig& cfg, const Options& o, bool& all_ok) {
  require_mc(o);
  Table t;
  t.columns = {"engine", "relation", "analytic", "mc", "ci_halfwidth", "z", "agree"};
  all_ok = true;
  const EventCounts counts = count_events(cfg, *o.trials, *o.seed, o.threads);
  auto row = [&](const std::string& name, bool exact, double analytic, FailureEvent ev) {
    const std::uint64_t k = counts.of(ev);
    double n = static_cast<double>(counts.trials);
    double mc = static_cast<double>(k) / n;
    double hw = wilson_halfwidth(k, counts.trials);
    double se = hw / 1.959963984540054;
    if (!(se > 0)) se = std::sqrt(std::max(analytic * (1 - analytic), 1e-300) / n);
    double z = (mc - analytic) / se;
    bool ok = exact ? std::abs(z) <= 3 : z <= 3;
    all_ok = all_ok && ok;
    t.rows.push_back({name, std::string(exact ? "exact" : "bound"), analytic, mc, hw, z, ok});
  };
  if (star_relaying(cfg)) {
    auto b = star_cycle_failure(cfg);
    bool exact = !is_adaptive(cfg.protocol) || cfg.ideal_scheduling;
    std::string proto(to_string(cfg.protocol));
    if (exact) {
      row(proto + "/downlink", true, b.p_downlink, FailureEvent::downlink);
      row(proto + "/uplink", true, b.p_uplink, FailureEvent::uplink);
    }
    row(proto + "/cycle", false, b.p_cycle_bound, FailureEvent::cycle);
  } else {
    row(std::string(to_string(cfg.protocol)) + "/cycle", false, generic_failure(cfg).p, FailureEvent::cycle);
  }
  return t;
}

std::vector<Scheme> all_schemes() {
  return {Scheme::one_hop,    Scheme::harq,          Scheme::nonsim_best,   Scheme::freq_hop_best,
          Scheme::fixed_2hop, Scheme::fixed_3hop,    Scheme::adaptive_2hop, Scheme::adaptive_3hop,
          Scheme::adaptive_3hop_opt};
}

Table cmd_sweep(const ScenarioConfig& cfg, const Options& o, const SnrSearchSpec& spec) {
  if (cfg.topology.kind != TopologyKind::star) throw UsageError("sweep needs a star scenario");
  std::vector<Scheme> schemes;
  for (auto& s : o.schemes) {
    auto v = parse_scheme(s);
    if (!v) throw UsageError("unknown scheme " + s);
    schemes.push_back(*v);
  }
  if (schemes.empty()) schemes = all_schemes();
  SweepOptions so;
  so.grid.step = o.grid_step;
  Table t;
  t.columns = {"scheme", "n", "min_snr_db", "inner_param"};
  for (auto& r : sweep_min_snr(cfg, o.n_min, o.n_max, schemes, spec, so))
    t.rows.push_back({std::string(to_string(r.scheme)), static_cast<long long>(r.n), opt_cell(r.min_snr_db),
                      opt_cell(r.inner_param)});
  return t;
}

Table cmd_optimize_phases(const ScenarioConfig& cfg, const Options& o, const SnrSearchSpec& spec) {
  if (!star_relaying(cfg) || hop_count(cfg.protocol) < 2)
    throw UsageError("optimize-phases needs a star protocol with 2 or 3 hops");
  AllocationGrid grid{o.grid_step};
  Table t;
  t.columns = {"side", "f1", "f2", "f3", "min_snr_db", "p_fail"};
  auto add = [&](const std::string& side, const PhaseAllocation& a) {
    t.rows.push_back({side, a.fractions[0], a.fractions[1], a.fractions[2], a.snr_db, a.p_fail});
  };
  if (o.side == "downlink") {
    add("downlink", optimize_phase_allocation(cfg, grid, Side::downlink, spec));
  } else if (o.side == "uplink") {
    add("uplink", optimize_phase_allocation(cfg, grid, Side::uplink, spec));
  } else if (o.side == "both") {
    auto s = optimize_star(cfg, grid, spec);
    add("downlink", s.downlink);
    add("uplink", s.uplink);
    t.rows.push_back({std::string("cycle"), Cell{}, Cell{}, Cell{}, s.combined.snr_db, s.combined.p_fail});
  } else {
    throw UsageError("--side must be downlink, uplink or both");
  }
  return t;
}

Table cmd_optimize_relays(const ScenarioConfig& cfg, const Options& o, const SnrSearchSpec& spec) {
  if (cfg.protocol != Protocol::nonsim_relay) throw UsageError("optimize-relays needs protocol=nonsim_relay");
  int lo = o.r_min.value_or(0), hi = o.r_max.value_or(std::max(0, cfg.topology.total_nodes() - 2));
  auto pc = optimize_relay_count(cfg, lo, hi, spec);
  Table t;
  t.columns = {"relays", "min_snr_db", "best", "at_boundary"};
  for (auto& [r, s] : pc.curve)
    t.rows.push_back({static_cast<long long>(r), std::isnan(s) ? Cell{} : Cell{s}, r == pc.best,
                      r == pc.best && pc.at_boundary});
  return t;
}

Table cmd_choose_hops(const ScenarioConfig& cfg, const Options& o, const SnrSearchSpec& spec) {
  auto h = choose_hops(cfg, o.hops, spec);
  Table t;
  t.columns = {"hops", "min_snr_db", "best"};
  for (int k : o.hops)
    t.rows.push_back({static_cast<long long>(k), opt_cell(h.per_hops[static_cast<std::size_t>(k - 1)]),
                      k == h.best_hops});
  return t;
}

Table cmd_duty_cycle(const ScenarioConfig& cfg, const Options& o, const SnrSearchSpec& spec) {
  if (!(o.duty_step > 0) || o.duty_step > 100) throw UsageError("--duty-step must lie in (0, 100]");
  std::vector<double> grid;
  for (int i = 1; i * o.duty_step <= 100 + 1e-9; ++i) grid.push_back(std::min(100.0, i * o.duty_step));
  auto curve = power_curve(cfg, grid, o.background_db, spec);
  auto best = power_minimizer(curve);
  Table t;
  t.columns = {"duty_pct",        "relays",          "realized_duty_pct", "awake_tx_snr_db",
               "avg_tx_power_db", "avg_total_power_db", "minimizer"};
  for (std::size_t i = 0; i < curve.size(); ++i) {
    auto& p = curve[i];
    t.rows.push_back({p.duty_pct, static_cast<long long>(p.relays), p.realized_duty_pct, p.awake_tx_snr_db,
                      p.avg_tx_power_db, p.avg_total_power_db, i == best});
  }
  return t;
}

Table cmd_dest_sweep(const ScenarioConfig& cfg, const SnrSearchSpec& spec) {
  Table t;
  t.columns = {"destinations", "min_snr_db"};
  for (auto& p : dest_sweep(cfg, spec)) t.rows.push_back({static_cast<long long>(p.destinations), p.snr_db});
  return t;
}

void add_common(CLI::App* sc, Options& o) {
  sc->add_option("--scenario", o.scenario, "Scenario file (key=value)")->required();
  sc->add_option("--out", o.out, "Output file (stdout when omitted)");
  sc->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sc->add_option("--seed", o.seed, "Random seed");
  sc->add_option("--trials", o.trials, "Monte Carlo trials");
  sc->add_option("--grid-step", o.grid_step, "Phase-fraction grid step");
  sc->add_option("--bracket-db", o.bracket_db, "SNR search bracket: low high")->expected(2);
  sc->add_option("--target", o.target, "Target cycle failure probability");
  sc->add_option("--tolerance-db", o.tolerance_db, "SNR search resolution");
  sc->add_flag("--ideal-scheduling", o.ideal_scheduling, "ACK dissemination is free and reliable");
  sc->add_option("--appendix-overheads", o.appendix_overheads,
                 "Scheduling bits and ACK bit in adaptive rates (true/false)");
  sc->add_option("--trace", o.trace, "Write the per-phase trace of trial 0 to this file");
  sc->add_option("--threads", o.threads, "Worker threads (0: all cores)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reliability analysis and simulation of cooperative relaying cycles"};
  app.require_subcommand(1);
  Options o;
  struct Cmd {
    const char* name;
    const char* help;
  };
  const Cmd cmds[] = {{"analyze", "Analytic failure probability"},
                      {"simulate", "Monte Carlo estimate"},
                      {"validate", "Analytic vs Monte Carlo agreement"},
                      {"sweep", "Minimum SNR per scheme and network size"},
                      {"optimize-phases", "Optimal phase fractions"},
                      {"optimize-relays", "Optimal relay count for non-simultaneous relaying"},
                      {"choose-hops", "Minimum SNR per hop count"},
                      {"duty-cycle", "Power against duty cycle"},
                      {"dest-sweep", "Minimum SNR against destinations per stream"}};
  std::map<std::string, CLI::App*> subs;
  for (auto& c : cmds) {
    auto* sc = app.add_subcommand(c.name, c.help);
    add_common(sc, o);
    subs[c.name] = sc;
  }
  subs["sweep"]->add_option("--n-min", o.n_min, "Smallest node count");
  subs["sweep"]->add_option("--n-max", o.n_max, "Largest node count");
  subs["sweep"]->add_option("--schemes", o.schemes, "Schemes to evaluate (default: all)");
  subs["optimize-relays"]->add_option("--r-min", o.r_min, "Smallest relay count");
  subs["optimize-relays"]->add_option("--r-max", o.r_max, "Largest relay count");
  subs["choose-hops"]->add_option("--hops", o.hops, "Hop counts to compare")->check(CLI::Range(1, 3));
  subs["duty-cycle"]->add_option("--background-db", o.background_db, "Background power (dB, -inf for none)");
  subs["duty-cycle"]->add_option("--duty-step", o.duty_step, "Duty grid step in percent");
  subs["optimize-phases"]->add_option("--side", o.side, "downlink, uplink or both");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  }
  std::string command;
  for (auto& [name, sc] : subs)
    if (sc->parsed()) command = name;

  try {
    ScenarioConfig cfg = load_scenario(o.scenario);
    if (o.ideal_scheduling) cfg.ideal_scheduling = true;
    if (o.appendix_overheads) cfg.scheduling_overhead = cfg.ack_bit = *o.appendix_overheads;
    validate(cfg);
    if (!o.bracket_db.empty() && !(o.bracket_db[0] < o.bracket_db[1]))
      throw UsageError("--bracket-db needs low < high");

    Table t;
    bool agree = true;
    std::optional<SnrSearchSpec> spec;
    if (command == "analyze") {
      t = cmd_analyze(cfg);
    } else if (command == "simulate") {
      t = cmd_simulate(cfg, o);
    } else if (command == "validate") {
      t = cmd_validate(cfg, o, agree);
    } else if (command == "sweep") {
      spec = search_spec(o, 140.0, 0.05);
      t = cmd_sweep(cfg, o, *spec);
    } else if (command == "optimize-phases") {
      spec = search_spec(o, 60.0, 0.05);
      t = cmd_optimize_phases(cfg, o, *spec);
    } else if (command == "optimize-relays") {
      spec = search_spec(o, 60.0, 0.05);
      t = cmd_optimize_relays(cfg, o, *spec);
    } else if (command == "choose-hops") {
      spec = search_spec(o, 60.0, 0.05);
      t = cmd_choose_hops(cfg, o, *spec);
    } else if (command == "duty-cycle") {
      spec = search_spec(o, 60.0, 0.001);
      t = cmd_duty_cycle(cfg, o, *spec);
    } else if (command == "dest-sweep") {
      spec = search_spec(o, 60.0, 0.05);
      t = cmd_dest_sweep(cfg, *spec);
    }

    auto fields = run_fields(command, o, spec ? &*spec : nullptr);
    if (o.out.empty()) {
      emit(out, o.format, fields, cfg, t);
    } else {
      std::ofstream f(o.out);
      if (!f) throw UsageError("cannot write " + o.out);
      emit(f, o.format, fields, cfg, t);
    }
    if (!agree) {
      err << "error: analytic and Monte Carlo estimates disagree (|z| > 3)\n";
      return disagreement;
    }
    return ok;
  } catch (const ScenarioParseError& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  } catch (const ZeroPhaseTime& e) {
    err << "error: phase " << e.field() << " has no time\n";
    return config_error;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  } catch (const InfeasibleBracket& e) {
    err << "error: " << e.what() << '\n';
    return infeasible;
  } catch (const InfeasibleDuty& e) {
    err << "error: " << e.what() << '\n';
    return infeasible;
  } catch (const NonMonotoneScan& e) {
    err << "error: " << e.what() << '\n';
    return infeasible;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace occow::cli
