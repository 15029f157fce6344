#include "occow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace occow {

namespace {

struct ProtocolName {
  Protocol p;
  std::string_view name;
};

constexpr ProtocolName kProtocols[] = {
    {Protocol::one_hop, "one_hop"},           {Protocol::fixed_2hop, "fixed_2hop"},
    {Protocol::adaptive_2hop, "adaptive_2hop"}, {Protocol::fixed_3hop, "fixed_3hop"},
    {Protocol::adaptive_3hop, "adaptive_3hop"}, {Protocol::nonsim_relay, "nonsim_relay"},
    {Protocol::freq_hop, "freq_hop"},         {Protocol::duty_cycled, "duty_cycled"},
};

constexpr double kSumTol = 1e-9;

std::string join_messages(const std::vector<ConfigViolation>& v) {
  std::ostringstream os;
  os << "invalid scenario:";
  for (const auto& x : v) os << "\n  " << to_string(x.kind) << " [" << x.field << "] " << x.detail;
  return os.str();
}

}  // namespace

std::string_view to_string(Protocol p) {
  for (const auto& e : kProtocols)
    if (e.p == p) return e.name;
  return "unknown";
}

std::string_view to_string(TopologyKind k) { return k == TopologyKind::star ? "star" : "generic"; }

std::optional<Protocol> parse_protocol(std::string_view s) {
  for (const auto& e : kProtocols)
    if (e.name == s) return e.p;
  return std::nullopt;
}

std::optional<TopologyKind> parse_topology(std::string_view s) {
  if (s == "star") return TopologyKind::star;
  if (s == "generic") return TopologyKind::generic;
  return std::nullopt;
}

int hop_count(Protocol p) {
  switch (p) {
    case Protocol::one_hop: return 1;
    case Protocol::fixed_2hop:
    case Protocol::adaptive_2hop: return 2;
    case Protocol::fixed_3hop:
    case Protocol::adaptive_3hop: return 3;
    default: return 0;
  }
}

bool is_adaptive(Protocol p) { return p == Protocol::adaptive_2hop || p == Protocol::adaptive_3hop; }

bool is_cooperative(Protocol p) { return hop_count(p) > 0; }

std::string_view to_string(ConfigErrorKind k) {
  switch (k) {
    case ConfigErrorKind::NonPositiveField: return "NonPositiveField";
    case ConfigErrorKind::FractionSumMismatch: return "FractionSumMismatch";
    case ConfigErrorKind::MissingProtocolKnob: return "MissingProtocolKnob";
    case ConfigErrorKind::UnexpectedProtocolKnob: return "UnexpectedProtocolKnob";
    case ConfigErrorKind::InvalidTopology: return "InvalidTopology";
  }
  return "ConfigError";
}

double ChannelParams::snr_db() const { return 10.0 * std::log10(snr_linear); }

ChannelParams ChannelParams::from_db(double snr_db, double bandwidth_hz) {
  return ChannelParams{std::pow(10.0, snr_db / 10.0), bandwidth_hz};
}

std::array<double, 3> even_split(int hops) {
  std::array<double, 3> f{0.0, 0.0, 0.0};
  for (int k = 0; k < hops; ++k) f[k] = 1.0 / hops;
  return f;
}

void apply_default_budgets(ScenarioConfig& cfg) {
  double half = (1.0 - cfg.phases.scheduling) * cfg.cycle_time_s / 2.0;
  if (cfg.phases.downlink_budget_s <= 0) cfg.phases.downlink_budget_s = half;
  if (cfg.phases.uplink_budget_s <= 0) cfg.phases.uplink_budget_s = half;
}

ScenarioConfig make_star(int n, Protocol protocol, double snr_db, double message_bits,
                         double cycle_time_s, double bandwidth_hz) {
  ScenarioConfig c;
  c.topology = TopologySpec{TopologyKind::star, n, 2 * n, 1};
  c.channel = ChannelParams::from_db(snr_db, bandwidth_hz);
  c.message_bits = message_bits;
  c.cycle_time_s = cycle_time_s;
  c.protocol = protocol;
  int h = std::max(1, hop_count(protocol));
  c.phases.downlink = even_split(h);
  c.phases.uplink = even_split(h);
  apply_default_budgets(c);
  return c;
}

ConfigError::ConfigError(std::vector<ConfigViolation> v)
    : std::runtime_error(join_messages(v)), violations_(std::move(v)) {}

std::vector<ConfigViolation> check(const ScenarioConfig& cfg) {
  std::vector<ConfigViolation> out;
  auto add = [&](ConfigErrorKind k, std::string field, std::string detail) {
    out.push_back({k, std::move(field), std::move(detail)});
  };
  auto positive = [&](double v, const char* field) {
    if (!(v > 0)) add(ConfigErrorKind::NonPositiveField, field, "must be > 0");
  };

  const auto& t = cfg.topology;
  const int nodes = t.total_nodes();
  if (t.n_nodes < 1) add(ConfigErrorKind::NonPositiveField, "n_nodes", "must be >= 1");
  if (t.n_streams < 1) add(ConfigErrorKind::NonPositiveField, "n_streams", "must be >= 1");
  if (t.kind == TopologyKind::star) {
    if (t.n_streams != 2 * t.n_nodes)
      add(ConfigErrorKind::InvalidTopology, "n_streams", "star requires n_streams = 2*n_nodes");
    if (t.avg_subscribers != 1)
      add(ConfigErrorKind::InvalidTopology, "avg_subscribers", "star requires avg_subscribers = 1");
  } else {
    if (t.n_nodes < 2) add(ConfigErrorKind::InvalidTopology, "n_nodes", "generic topology needs >= 2 nodes");
    if (t.avg_subscribers < 1 || t.avg_subscribers > t.n_nodes - 1)
      add(ConfigErrorKind::InvalidTopology, "avg_subscribers", "must lie in [1, n_nodes-1]");
    if (hop_count(cfg.protocol) == 1 || is_adaptive(cfg.protocol))
      add(ConfigErrorKind::InvalidTopology, "protocol",
          "one_hop and adaptive schedules are defined for the star topology only");
  }

  positive(cfg.channel.snr_linear, "snr_db");
  positive(cfg.channel.bandwidth_hz, "bandwidth_hz");
  positive(cfg.message_bits, "message_bits");
  positive(cfg.cycle_time_s, "cycle_time_s");

  const auto& ph = cfg.phases;
  static const char* dnames[] = {"f_D1", "f_D2", "f_D3"};
  static const char* unames[] = {"f_U1", "f_U2", "f_U3"};
  for (int k = 0; k < 3; ++k) {
    if (ph.downlink[k] < 0) add(ConfigErrorKind::NonPositiveField, dnames[k], "must be >= 0");
    if (ph.uplink[k] < 0) add(ConfigErrorKind::NonPositiveField, unames[k], "must be >= 0");
  }
  if (ph.scheduling < 0 || ph.scheduling >= 1)
    add(ConfigErrorKind::FractionSumMismatch, "f_S", "must lie in [0, 1)");

  const int hops = hop_count(cfg.protocol);
  if (hops > 0 && t.kind == TopologyKind::star) {
    auto side = [&](const std::array<double, 3>& f, const char* const* names, const char* label) {
      double sum = f[0] + f[1] + f[2];
      if (std::abs(sum - 1.0) > kSumTol)
        add(ConfigErrorKind::FractionSumMismatch, label, "fractions sum to " + std::to_string(sum));
      for (int k = hops; k < 3; ++k)
        if (f[k] != 0.0)
          add(ConfigErrorKind::FractionSumMismatch, names[k], "phase unused by a " + std::to_string(hops) + "-hop protocol");
    };
    side(ph.downlink, dnames, "f_D1+f_D2+f_D3");
    side(ph.uplink, unames, "f_U1+f_U2+f_U3");
    positive(ph.downlink_budget_s, "downlink_budget_s");
    positive(ph.uplink_budget_s, "uplink_budget_s");
    double used = ph.downlink_budget_s + ph.uplink_budget_s + cfg.scheduling_time_s();
    if (used > cfg.cycle_time_s * (1.0 + kSumTol))
      add(ConfigErrorKind::FractionSumMismatch, "downlink_budget_s+uplink_budget_s",
          "budgets plus scheduling time exceed the cycle");
  }

  const auto& kn = cfg.knobs;
  auto need = [&](bool present, const char* field) {
    if (!present) add(ConfigErrorKind::MissingProtocolKnob, field, std::string("required by ") + std::string(to_string(cfg.protocol)));
  };
  auto forbid = [&](bool present, const char* field) {
    if (present) add(ConfigErrorKind::UnexpectedProtocolKnob, field, std::string("not used by ") + std::string(to_string(cfg.protocol)));
  };
  bool nonsim = cfg.protocol == Protocol::nonsim_relay;
  bool fh = cfg.protocol == Protocol::freq_hop;
  bool duty = cfg.protocol == Protocol::duty_cycled;
  nonsim ? need(kn.relays.has_value(), "relays") : forbid(kn.relays.has_value(), "relays");
  nonsim ? need(kn.hops.has_value(), "hops") : forbid(kn.hops.has_value(), "hops");
  fh ? need(kn.subchannels.has_value(), "subchannels") : forbid(kn.subchannels.has_value(), "subchannels");
  duty ? need(kn.duty_pct.has_value(), "duty_pct") : forbid(kn.duty_pct.has_value(), "duty_pct");

  if (nonsim && kn.relays && (*kn.relays < 0 || *kn.relays > nodes - 2))
    add(ConfigErrorKind::InvalidTopology, "relays", "must lie in [0, " + std::to_string(nodes - 2) + "]");
  if (nonsim && kn.hops && *kn.hops != 2 && *kn.hops != 3)
    add(ConfigErrorKind::InvalidTopology, "hops", "must be 2 or 3");
  if (fh && kn.subchannels && *kn.subchannels < 1)
    add(ConfigErrorKind::NonPositiveField, "subchannels", "must be >= 1");
  if (duty && kn.duty_pct && (*kn.duty_pct < 0 || *kn.duty_pct > 100))
    add(ConfigErrorKind::InvalidTopology, "duty_pct", "must lie in [0, 100]");
  return out;
}

const ScenarioConfig& validate(const ScenarioConfig& cfg) {
  auto v = check(cfg);
  if (!v.empty()) throw ConfigError(std::move(v));
  return cfg;
}

FailureProbability FailureProbability::analytic(double p) {
  return FailureProbability{p, std::log(p), Source::analytic, 0.0};
}

FailureProbability FailureProbability::monte_carlo(double p, double hw) {
  return FailureProbability{p, std::log(p), Source::monte_carlo, hw};
}

ZeroPhaseTime::ZeroPhaseTime(const std::string& field)
    : std::domain_error("zero time allocated to required phase " + field), field_(field) {}

double rate_for(double bits, double seconds) {
  if (bits <= 0) return 0.0;
  if (seconds <= 0) return std::numeric_limits<double>::infinity();
  return bits / seconds;
}

PhaseRates phase_rates(const ScenarioConfig& cfg, bool allow_dead_phases) {
  const int hops = hop_count(cfg.protocol);
  if (hops == 0 || cfg.topology.kind != TopologyKind::star)
    throw std::invalid_argument("phase rates are defined for star relaying protocols");

  const int n = cfg.topology.n_nodes;
  const double m = cfg.message_bits;
  const bool adaptive = is_adaptive(cfg.protocol);
  const auto& ph = cfg.phases;
  static const char* dnames[] = {"f_D1", "f_D2", "f_D3"};
  static const char* unames[] = {"f_U1", "f_U2", "f_U3"};

  double td[3], tu[3];
  for (int k = 0; k < 3; ++k) {
    td[k] = k < hops ? ph.downlink[k] * ph.downlink_budget_s : 0.0;
    tu[k] = k < hops ? ph.uplink[k] * ph.uplink_budget_s : 0.0;
    if (!allow_dead_phases && k < hops) {
      if (td[k] <= 0) throw ZeroPhaseTime(dnames[k]);
      if (tu[k] <= 0) throw ZeroPhaseTime(unames[k]);
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  PhaseRates r;
  r.n = n;
  r.d1 = rate_for(m * n, td[0]);
  r.u1 = rate_for((m + (adaptive && cfg.ack_bit ? 1.0 : 0.0)) * n, tu[0]);
  r.d2.assign(n + 1, inf);
  r.d3.assign(n + 1, inf);
  r.u2.assign(n + 1, inf);
  r.u3.assign(n + 1, inf);
  const double overhead = adaptive && cfg.scheduling_overhead ? 2.0 * n : 0.0;
  for (int a = 0; a <= n; ++a) {
    double down_bits = adaptive ? m * (n - a) + overhead : m * n;
    double up_bits = adaptive ? m * (n - a) : m * n;
    if (hops >= 2) {
      r.d2[a] = rate_for(down_bits, td[1]);
      r.u2[a] = rate_for(up_bits, tu[1]);
    }
    if (hops >= 3) {
      r.d3[a] = rate_for(down_bits, td[2]);
      r.u3[a] = rate_for(up_bits, tu[2]);
    }
  }

  if (adaptive && !cfg.ideal_scheduling) {
    r.ack_rounds = (hops == 3 && cfg.three_hop_acks) ? 3 : 2;
    double ts = cfg.scheduling_time_s();
    if (!allow_dead_phases && ts <= 0) throw ZeroPhaseTime("f_S");
    r.s = rate_for(r.ack_rounds * 2.0 * n * (n + 1), ts);
  }
  return r;
}

}  // namespace occow
