#include "occow/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "occow/analytic_generic.hpp"

namespace occow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

long lattice_size(const SnrSearchSpec& spec) {
  if (!(spec.tolerance_db > 0) || !(spec.high_db > spec.low_db))
    throw std::invalid_argument("SNR bracket needs low < high and tolerance > 0");
  return std::lround(std::ceil((spec.high_db - spec.low_db) / spec.tolerance_db - 1e-9));
}

std::string db_text(double v) {
  std::ostringstream os;
  os << v << " dB";
  return os.str();
}

void prescan(const SnrObjective& f, const SnrSearchSpec& spec) {
  double prev = f(spec.low_db);
  for (double x = spec.low_db + 1.0; x <= spec.high_db + 1e-9; x += 1.0) {
    double cur = f(x);
    if (cur > prev * (1 + 1e-9) + 1e-300)
      throw NonMonotoneScan("failure probability rises between " + db_text(x - 1.0) + " and " + db_text(x));
    prev = cur;
  }
}

// Smallest k in (lo, hi] with f(k) <= target, given f(lo) > target >= f(hi).
long bisect(const SnrObjective& f, const SnrSearchSpec& spec, long lo, long hi) {
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    if (f(lattice_snr(spec, mid)) <= spec.target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

struct Candidate {
  long k = -1;
  long spread = 0;
  std::array<int, 3> units{};
};

bool better(const Candidate& a, const Candidate& b) {
  if (b.k < 0) return true;
  if (a.k != b.k) return a.k < b.k;
  if (a.spread != b.spread) return a.spread < b.spread;
  return a.units > b.units;
}

std::array<double, 3> fractions_of(const std::array<int, 3>& u, int K) {
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i) f[static_cast<std::size_t>(i)] = static_cast<double>(u[static_cast<std::size_t>(i)]) / K;
  return f;
}

Protocol hops_protocol(int h, bool adaptive) {
  switch (h) {
    case 1: return Protocol::one_hop;
    case 2: return adaptive ? Protocol::adaptive_2hop : Protocol::fixed_2hop;
    case 3: return adaptive ? Protocol::adaptive_3hop : Protocol::fixed_3hop;
    default: throw std::invalid_argument("hop count must be 1, 2 or 3");
  }
}

ScenarioConfig star_like(const ScenarioConfig& tmpl, int n) {
  ScenarioConfig c = tmpl;
  c.topology = TopologySpec{TopologyKind::star, n, 2 * n, 1};
  return c;
}

std::optional<SnrResult> try_search(const ScenarioConfig& cfg, const SnrSearchSpec& spec) {
  try {
    return min_snr(cfg, spec);
  } catch (const InfeasibleBracket&) {
    return std::nullopt;
  }
}

std::optional<double> try_min_snr(const ScenarioConfig& cfg, const SnrSearchSpec& spec) {
  auto r = try_search(cfg, spec);
  if (!r) return std::nullopt;
  return r->snr_db;
}

// Equal lattice SNRs are separated by the failure probability at that SNR.
bool beats(const SnrResult& a, const SnrResult& b) {
  if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
  return a.p_fail < b.p_fail;
}

ParamChoice scan_param(const ScenarioConfig& cfg, int lo, int hi, const SnrSearchSpec& spec,
                       void (*set)(ScenarioConfig&, int)) {
  if (lo > hi) throw std::invalid_argument("empty parameter range");
  ParamChoice out;
  std::optional<SnrResult> best;
  for (int v = lo; v <= hi; ++v) {
    ScenarioConfig c = cfg;
    set(c, v);
    auto s = try_search(c, spec);
    out.curve.emplace_back(v, s ? s->snr_db : kNaN);
    if (s && (!best || beats(*s, *best))) {
      best = s;
      out.best = v;
      out.snr_db = s->snr_db;
    }
  }
  const bool found = best.has_value();
  if (!found) throw InfeasibleBracket("no parameter value meets the target inside the bracket");
  out.at_boundary = out.best == lo || out.best == hi;
  return out;
}

}  // namespace

double lattice_snr(const SnrSearchSpec& spec, long k) {
  return std::min(spec.high_db, spec.low_db + static_cast<double>(k) * spec.tolerance_db);
}

SnrResult min_snr(const SnrObjective& f, const SnrSearchSpec& spec) {
  const long K = lattice_size(spec);
  if (spec.prescan) prescan(f, spec);
  double top = f(lattice_snr(spec, K));
  if (!(top <= spec.target))
    throw InfeasibleBracket("target not met at " + db_text(spec.high_db) + " (p = " + std::to_string(top) + ")");
  SnrResult r;
  double bottom = f(lattice_snr(spec, 0));
  long k = 0;
  if (bottom <= spec.target)
    r.at_lower_bracket = true;
  else
    k = bisect(f, spec, 0, K);
  r.snr_db = lattice_snr(spec, k);
  r.p_fail = f(r.snr_db);
  if (!(r.p_fail <= spec.target) || (k > 0 && f(lattice_snr(spec, k - 1)) <= spec.target))
    throw NonMonotoneScan("bisection result does not bracket the target at " + db_text(r.snr_db));
  return r;
}

ScenarioConfig with_snr_db(ScenarioConfig cfg, double snr_db) {
  cfg.channel = ChannelParams::from_db(snr_db, cfg.channel.bandwidth_hz);
  return cfg;
}

double scheme_failure(const ScenarioConfig& cfg) {
  if (cfg.topology.kind == TopologyKind::star && hop_count(cfg.protocol) >= 1)
    return star_cycle_failure(cfg, true).p_cycle_bound;
  return generic_failure(cfg).p;
}

SnrResult min_snr(const ScenarioConfig& cfg, const SnrSearchSpec& spec) {
  validate(cfg);
  return min_snr([&](double db) { return scheme_failure(with_snr_db(cfg, db)); }, spec);
}

double side_failure(const ScenarioConfig& cfg, Side side) {
  PhaseRates r = phase_rates(cfg, true);
  return side == Side::downlink ? star_downlink_failure(cfg, r) : star_uplink_failure(cfg, r);
}

PhaseAllocation optimize_phase_allocation(const ScenarioConfig& cfg, const AllocationGrid& grid, Side side,
                                          const SnrSearchSpec& spec) {
  const int hops = hop_count(cfg.protocol);
  if (cfg.topology.kind != TopologyKind::star || hops < 1)
    throw std::invalid_argument("phase allocation needs a star relaying protocol");
  if (!(grid.step > 0) || grid.step > 1) throw std::invalid_argument("grid step must lie in (0, 1]");
  const int K = static_cast<int>(std::lround(1.0 / grid.step));
  if (std::abs(K * grid.step - 1.0) > 1e-9) throw std::invalid_argument("grid step must divide 1");
  const long L = lattice_size(spec);

  SnrSearchSpec inner = spec;
  inner.prescan = false;

  Candidate best;
  int evaluated = 0;
  auto visit = [&](std::array<int, 3> u) {
    ++evaluated;
    ScenarioConfig c = cfg;
    auto& plan = side == Side::downlink ? c.phases.downlink : c.phases.uplink;
    plan = fractions_of(u, K);
    auto f = [&](double db) { return side_failure(with_snr_db(c, db), side); };
    Candidate cand;
    cand.units = u;
    for (int i = 0; i < hops; ++i) {
      long d = static_cast<long>(hops) * u[static_cast<std::size_t>(i)] - K;
      cand.spread += d * d;
    }
    if (best.k >= 0) {
      // Only a split that meets the target at the incumbent SNR can tie or win.
      if (!(f(lattice_snr(spec, best.k)) <= spec.target)) return;
      cand.k = best.k == 0 || f(lattice_snr(spec, 0)) <= spec.target ? 0 : bisect(f, inner, 0, best.k);
    } else {
      if (!(f(lattice_snr(spec, L)) <= spec.target)) return;
      cand.k = f(lattice_snr(spec, 0)) <= spec.target ? 0 : bisect(f, inner, 0, L);
    }
    if (better(cand, best)) best = cand;
  };

  if (hops == 1) {
    visit({K, 0, 0});
  } else if (hops == 2) {
    for (int i = 1; i < K; ++i) visit({i, K - i, 0});
  } else {
    for (int i = 1; i < K; ++i)
      for (int j = 1; i + j < K; ++j) visit({i, j, K - i - j});
  }
  if (best.k < 0) throw InfeasibleBracket("no phase split meets the target inside the bracket");

  PhaseAllocation out;
  out.fractions = fractions_of(best.units, K);
  out.snr_db = lattice_snr(spec, best.k);
  out.evaluated = evaluated;
  ScenarioConfig c = cfg;
  (side == Side::downlink ? c.phases.downlink : c.phases.uplink) = out.fractions;
  if (spec.prescan) prescan([&](double db) { return side_failure(with_snr_db(c, db), side); }, spec);
  out.p_fail = side_failure(with_snr_db(c, out.snr_db), side);
  return out;
}

StarOptimum optimize_star(const ScenarioConfig& cfg, const AllocationGrid& grid, const SnrSearchSpec& spec) {
  SnrSearchSpec half = spec;
  half.target = spec.target / 2;
  StarOptimum out;
  out.downlink = optimize_phase_allocation(cfg, grid, Side::downlink, half);
  out.uplink = optimize_phase_allocation(cfg, grid, Side::uplink, half);
  out.config = cfg;
  out.config.phases.downlink = out.downlink.fractions;
  out.config.phases.uplink = out.uplink.fractions;
  out.combined = min_snr(out.config, spec);
  out.config = with_snr_db(out.config, out.combined.snr_db);
  out.breakdown = star_cycle_failure(out.config);
  return out;
}

ParamChoice optimize_relay_count(const ScenarioConfig& cfg, int r_lo, int r_hi, const SnrSearchSpec& spec) {
  if (cfg.protocol != Protocol::nonsim_relay) throw std::invalid_argument("relay count needs nonsim_relay");
  return scan_param(cfg, r_lo, r_hi, spec, [](ScenarioConfig& c, int r) { c.knobs.relays = r; });
}

ParamChoice optimize_subchannels(const ScenarioConfig& cfg, int k_lo, int k_hi, const SnrSearchSpec& spec) {
  if (cfg.protocol != Protocol::freq_hop) throw std::invalid_argument("sub-channel count needs freq_hop");
  return scan_param(cfg, k_lo, k_hi, spec, [](ScenarioConfig& c, int k) { c.knobs.subchannels = k; });
}

HopChoice choose_hops(const ScenarioConfig& cfg, const std::vector<int>& candidates, const SnrSearchSpec& spec) {
  if (cfg.topology.kind != TopologyKind::star) throw std::invalid_argument("hop choice needs a star");
  HopChoice out;
  std::optional<SnrResult> best;
  std::vector<int> hs = candidates;
  std::sort(hs.begin(), hs.end());
  for (int h : hs) {
    ScenarioConfig c = cfg;
    c.protocol = hops_protocol(h, is_adaptive(cfg.protocol));
    c.knobs = {};
    c.phases.downlink = even_split(h);
    c.phases.uplink = even_split(h);
    auto s = try_search(c, spec);
    if (s) out.per_hops[static_cast<std::size_t>(h - 1)] = s->snr_db;
    if (s && (!best || beats(*s, *best))) {
      best = s;
      out.best_hops = h;
      out.snr_db = s->snr_db;
    }
  }
  if (!best) throw InfeasibleBracket("no hop count meets the target inside the bracket");
  return out;
}

std::vector<DestPoint> dest_sweep(const ScenarioConfig& star_cfg, const SnrSearchSpec& spec) {
  const int n = star_cfg.topology.n_nodes;
  if (n < 2) throw std::invalid_argument("destination sweep needs n >= 2");
  std::vector<DestPoint> out;
  ScenarioConfig star = star_like(star_cfg, n);
  star.protocol = Protocol::fixed_2hop;
  star.knobs = {};
  star.phases.downlink = even_split(2);
  star.phases.uplink = even_split(2);
  out.push_back({0, min_snr(star, spec).snr_db});
  ScenarioConfig g = star;
  g.topology = TopologySpec{TopologyKind::generic, n, 2 * n, 1};
  for (int d = 1; d <= n - 1; ++d) {
    g.topology.avg_subscribers = d;
    out.push_back({d, min_snr(g, spec).snr_db});
  }
  return out;
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::one_hop: return "one_hop";
    case Scheme::harq: return "harq";
    case Scheme::nonsim_best: return "nonsim_best";
    case Scheme::freq_hop_best: return "freq_hop_best";
    case Scheme::fixed_2hop: return "fixed_2hop";
    case Scheme::fixed_3hop: return "fixed_3hop";
    case Scheme::adaptive_2hop: return "adaptive_2hop";
    case Scheme::adaptive_3hop: return "adaptive_3hop";
    case Scheme::adaptive_3hop_opt: return "adaptive_3hop_opt";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view s) {
  for (Scheme v : {Scheme::one_hop, Scheme::harq, Scheme::nonsim_best, Scheme::freq_hop_best, Scheme::fixed_2hop,
                   Scheme::fixed_3hop, Scheme::adaptive_2hop, Scheme::adaptive_3hop, Scheme::adaptive_3hop_opt})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

ScenarioConfig baseline_config(const ScenarioConfig& star_cfg, Protocol protocol) {
  ScenarioConfig c = star_cfg;
  c.protocol = protocol;
  c.knobs = {};
  int h = std::max(1, hop_count(protocol));
  c.phases.downlink = even_split(h);
  c.phases.uplink = even_split(h);
  return c;
}

namespace {

// Without scheduling time the ACK phase cannot run, so it is taken as ideal.
ScenarioConfig adaptive_config(const ScenarioConfig& base, Protocol p) {
  ScenarioConfig c = baseline_config(base, p);
  if (!(c.phases.scheduling > 0)) c.ideal_scheduling = true;
  return c;
}

}  // namespace

SweepRow sweep_point(const ScenarioConfig& tmpl, int n, Scheme scheme, const SnrSearchSpec& spec,
                     const SweepOptions& opt) {
  SweepRow row{scheme, n, std::nullopt, std::nullopt};
  ScenarioConfig base = star_like(tmpl, n);
  try {
    switch (scheme) {
      case Scheme::one_hop: row.min_snr_db = try_min_snr(baseline_config(base, Protocol::one_hop), spec); break;
      case Scheme::fixed_2hop: row.min_snr_db = try_min_snr(baseline_config(base, Protocol::fixed_2hop), spec); break;
      case Scheme::fixed_3hop: row.min_snr_db = try_min_snr(baseline_config(base, Protocol::fixed_3hop), spec); break;
      case Scheme::adaptive_2hop:
        row.min_snr_db = try_min_snr(adaptive_config(base, Protocol::adaptive_2hop), spec);
        break;
      case Scheme::adaptive_3hop:
        row.min_snr_db = try_min_snr(adaptive_config(base, Protocol::adaptive_3hop), spec);
        break;
      case Scheme::harq: {
        const int s = base.topology.n_streams;
        auto f = [&](double db) {
          return harq_failure(s, base.message_bits, base.cycle_time_s,
                              ChannelParams::from_db(db, base.channel.bandwidth_hz));
        };
        row.min_snr_db = min_snr(f, spec).snr_db;
        break;
      }
      case Scheme::nonsim_best: {
        ScenarioConfig c = baseline_config(base, Protocol::nonsim_relay);
        c.knobs.hops = opt.nonsim_hops;
        c.knobs.relays = 0;
        auto pc = optimize_relay_count(c, 0, std::max(0, c.topology.total_nodes() - 2), spec);
        row.min_snr_db = pc.snr_db;
        row.inner_param = pc.best;
        break;
      }
      case Scheme::freq_hop_best: {
        ScenarioConfig c = baseline_config(base, Protocol::freq_hop);
        c.knobs.subchannels = 1;
        auto pc = optimize_subchannels(c, 1, opt.max_subchannels, spec);
        row.min_snr_db = pc.snr_db;
        row.inner_param = pc.best;
        break;
      }
      case Scheme::adaptive_3hop_opt: {
        ScenarioConfig c = baseline_config(base, Protocol::adaptive_3hop);
        c.ideal_scheduling = true;
        c.phases.scheduling = 0;
        apply_default_budgets(c);
        row.min_snr_db = optimize_star(c, opt.grid, spec).combined.snr_db;
        break;
      }
    }
  } catch (const InfeasibleBracket&) {
    row.min_snr_db.reset();
  }
  return row;
}

std::vector<SweepRow> sweep_min_snr(const ScenarioConfig& tmpl, int n_lo, int n_hi,
                                    const std::vector<Scheme>& schemes, const SnrSearchSpec& spec,
                                    const SweepOptions& opt) {
  if (n_lo < 1 || n_hi < n_lo) throw std::invalid_argument("node range must satisfy 1 <= lo <= hi");
  std::vector<SweepRow> rows;
  for (Scheme s : schemes)
    for (int n = n_lo; n <= n_hi; ++n) rows.push_back(sweep_point(tmpl, n, s, spec, opt));
  return rows;
}

std::vector<PowerPoint> power_curve(const ScenarioConfig& star_cfg, const std::vector<double>& duty_grid,
                                    double background_db, const SnrSearchSpec& spec) {
  ScenarioConfig c = baseline_config(star_cfg, Protocol::duty_cycled);
  const int N = c.topology.total_nodes();
  if (N < 3) throw std::invalid_argument("duty cycling needs at least one candidate relay");
  const double bg = std::isinf(background_db) && background_db < 0 ? 0.0 : std::pow(10.0, background_db / 10.0);
  std::vector<PowerPoint> out;
  for (double x : duty_grid) {
    if (!(x > 0) || x > 100) throw InfeasibleDuty("duty must lie in (0, 100]");
    c.knobs.duty_pct = x;
    PowerPoint pt;
    pt.duty_pct = x;
    pt.relays = duty_relays(N, x);
    pt.realized_duty_pct = 100.0 * pt.relays / (N - 2);
    try {
      pt.awake_tx_snr_db = min_snr(c, spec).snr_db;
    } catch (const InfeasibleBracket& e) {
      throw InfeasibleDuty(e.what());
    }
    double share = pt.realized_duty_pct / 100.0;
    double s_lin = std::pow(10.0, pt.awake_tx_snr_db / 10.0);
    pt.avg_tx_power_db = 10.0 * std::log10(share * s_lin);
    pt.avg_total_power_db = 10.0 * std::log10(share * (s_lin + bg));
    out.push_back(pt);
  }
  return out;
}

std::size_t power_minimizer(const std::vector<PowerPoint>& curve) {
  if (curve.empty()) throw std::invalid_argument("empty power curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].avg_total_power_db < curve[best].avg_total_power_db) best = i;
  return best;
}

}  // namespace occow
