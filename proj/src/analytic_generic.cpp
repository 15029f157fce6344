#include "occow/analytic_generic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace occow {

double pair_failure_2hop(double p, int relays) {
  if (p <= 0) return 0.0;
  // Direct link down, and every relay either missed the source or cannot reach
  // the destination.
  KahanSum s;
  for (int j = 0; j <= relays; ++j) s += binom_pmf(relays, j, p) * ipow(p, j);
  return clamp01(p * s.value());
}

double pair_failure_3hop(double p, int relays) {
  if (p <= 0) return 0.0;
  KahanSum s;
  for (int i = 0; i <= relays; ++i) {
    double pi = binom_pmf(relays, i, p);
    if (pi == 0) continue;
    double pii = ipow(p, i);
    KahanSum t;
    for (int j = 0; j <= relays - i; ++j) t += binom_pmf(relays - i, j, pii) * ipow(p, j);
    s += pi * pii * t.value();
  }
  return clamp01(p * s.value());
}

double union_bound_2hop(int n, int s, int d, double p) {
  return std::min(1.0, static_cast<double>(s) * d * pair_failure_2hop(p, std::max(0, n - 2)));
}

double union_bound_3hop(int n, int s, int d, double p) {
  return std::min(1.0, static_cast<double>(s) * d * pair_failure_3hop(p, std::max(0, n - 2)));
}

double slotted_rate(int s, double m, double T, int slots) { return rate_for(s * m * slots, T); }

double nonsim_rate(int s, double m, double T, int k, int r) { return rate_for(s * m * (1.0 + (k - 1.0) * r), T); }

double nonsim_relay_failure(int n, int s, int d, double m, double T, int k, int r, const ChannelParams& ch) {
  if (r < 0 || r > std::max(0, n - 2)) throw std::invalid_argument("relay count outside [0, n-2]");
  if (k != 2 && k != 3) throw std::invalid_argument("non-simultaneous relaying uses 2 or 3 hops");
  double p = link_failure(nonsim_rate(s, m, T, k, r), ch);
  double pair = k == 2 ? pair_failure_2hop(p, r) : pair_failure_3hop(p, r);
  return std::min(1.0, static_cast<double>(s) * d * pair);
}

double freq_hop_failure(int s, int k_fh, double base_rate, const ChannelParams& ch) {
  if (k_fh < 1) throw std::invalid_argument("k_fh must be >= 1");
  LinkProb sc = link_failure_prob(k_fh * base_rate, ch);
  double all_fail = sc.p_fail >= 1 ? 1.0 : std::exp(k_fh * sc.log_p_fail);
  return at_least_one_fails(s, all_fail);
}

int duty_relays(int n, double x) {
  double v = x * (n - 2) / 100.0;
  int r = static_cast<int>(std::ceil(v - 1e-9));
  return std::clamp(r, 0, std::max(0, n - 2));
}

double duty_cycle_failure(int n, int s, int d, double p, double x) {
  return std::min(1.0, static_cast<double>(s) * d * pair_failure_2hop(p, duty_relays(n, x)));
}

double harq_failure(int s, double m, double T, const ChannelParams& ch) {
  return at_least_one_fails(s, link_failure(rate_for(m, T), ch));
}

double scheme_rate(const ScenarioConfig& cfg) {
  const auto& t = cfg.topology;
  const double m = cfg.message_bits, T = cfg.cycle_time_s;
  switch (cfg.protocol) {
    case Protocol::fixed_2hop: return slotted_rate(t.n_streams, m, T, 2);
    case Protocol::fixed_3hop: return slotted_rate(t.n_streams, m, T, 3);
    case Protocol::nonsim_relay: return nonsim_rate(t.n_streams, m, T, cfg.knobs.hops.value(), cfg.knobs.relays.value());
    case Protocol::freq_hop: return cfg.knobs.subchannels.value() * slotted_rate(t.n_streams, m, T, 1);
    case Protocol::duty_cycled: return slotted_rate(t.n_streams, m, T, 2);
    default: throw std::invalid_argument("no uniform-rate analysis for this protocol");
  }
}

FailureProbability generic_failure(const ScenarioConfig& cfg) {
  const auto& t = cfg.topology;
  const int N = t.total_nodes(), s = t.n_streams, d = t.avg_subscribers;
  const double m = cfg.message_bits, T = cfg.cycle_time_s;
  const auto& ch = cfg.channel;
  double p = 0.0;
  switch (cfg.protocol) {
    case Protocol::fixed_2hop:
      if (t.kind == TopologyKind::star) throw std::invalid_argument("star relaying uses the star engines");
      p = union_bound_2hop(N, s, d, link_failure(scheme_rate(cfg), ch));
      break;
    case Protocol::fixed_3hop:
      if (t.kind == TopologyKind::star) throw std::invalid_argument("star relaying uses the star engines");
      p = union_bound_3hop(N, s, d, link_failure(scheme_rate(cfg), ch));
      break;
    case Protocol::nonsim_relay:
      p = nonsim_relay_failure(N, s, d, m, T, cfg.knobs.hops.value(), cfg.knobs.relays.value(), ch);
      break;
    case Protocol::freq_hop:
      // Each of the s*d pairs is an independent set of k_fh tries.
      p = freq_hop_failure(s * d, cfg.knobs.subchannels.value(), slotted_rate(s, m, T, 1), ch);
      break;
    case Protocol::duty_cycled:
      p = duty_cycle_failure(N, s, d, link_failure(scheme_rate(cfg), ch), cfg.knobs.duty_pct.value());
      break;
    default: throw std::invalid_argument("no generic analysis for this protocol");
  }
  return FailureProbability::analytic(p);
}

}  // namespace occow
