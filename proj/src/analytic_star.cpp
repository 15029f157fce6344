#include "occow/analytic_star.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "occow/analytic_generic.hpp"

namespace occow {

namespace {

using std::span;

double B(int n, int m, double p) { return binom_pmf(n, m, p); }
double F(int n, double p) { return at_least_one_fails(n, p); }

void require_size(span<const double> v, int n, const char* what) {
  if (static_cast<int>(v.size()) < n) throw std::invalid_argument(std::string(what) + " needs one entry per a in [0, n)");
}

// Fractions of a capacity interval, in CDF coordinates u = P(C < cap) with u
// uniform on [lo, hi), falling in each usefulness class for phases II/III.
struct ClassSplit {
  double t3 = 0;     // cap >= R3
  double t2 = 0;     // R2 <= cap < R3
  double none = 0;   // cap < min(R2, R3)
};

ClassSplit split_interval(double lo, double hi, double p2, double p3) {
  ClassSplit s;
  double w = hi - lo;
  if (!(w > 0)) return s;
  double c23 = std::min(p2, p3);
  s.t3 = clamp01((hi - std::max(p3, lo)) / w);
  s.none = clamp01((std::min(c23, hi) - lo) / w);
  s.t2 = clamp01((std::min(p3, hi) - std::max(c23, lo)) / w);
  return s;
}

// log of multinomial(k; i, j, k-i-j) * a^i b^j c^(k-i-j); -inf when impossible.
double log_trinomial(int k, int i, int j, const ClassSplit& s) {
  int l = k - i - j;
  if ((i > 0 && s.t3 <= 0) || (j > 0 && s.t2 <= 0) || (l > 0 && s.none <= 0))
    return -std::numeric_limits<double>::infinity();
  double v = log_factorial(k) - log_factorial(i) - log_factorial(j) - log_factorial(l);
  if (i > 0) v += i * std::log(s.t3);
  if (j > 0) v += j * std::log(s.t2);
  if (l > 0) v += l * std::log(s.none);
  return v;
}

double three_hop_uplink_given_a(int n, int a, double p1, double p2, double p3) {
  const int M = n - a;
  const double pmin = std::min(p1, p2);
  const ClassSplit A = split_interval(p1, 1.0, p2, p3);
  const ClassSplit N = split_interval(0.0, p1, p2, p3);

  std::vector<double> p1pow(n + 1);
  for (int k = 0; k <= n; ++k) p1pow[k] = ipow(p1, k);

  KahanSum sum;
  for (int a3 = 0; a3 <= a; ++a3) {
    for (int a2 = 0; a2 + a3 <= a; ++a2) {
      double la = a == 0 ? 0.0 : log_trinomial(a, a3, a2, A);
      if (std::isinf(la)) continue;
      const int uH = a - a3 - a2;
      for (int n3 = 0; n3 <= M; ++n3) {
        for (int n2 = 0; n3 + n2 <= M; ++n2) {
          const int uN = M - n3 - n2;
          if (uN == 0) continue;
          double ln = log_trinomial(M, n3, n2, N);
          if (std::isinf(ln)) continue;
          const int t3 = a3 + n3, t2 = a2 + n2;
          // x: a stuck node has no phase-II link to any node that reaches the
          // controller in phase III. rho: a needer has no route of its own
          // through a capable node, given it is stuck.
          const double x = ipow(p2, t3);
          double rho;
          if (t3 == 0) rho = p1pow[t2];
          else if (p2 > 0) rho = std::pow(pmin / p2, t3) * p1pow[t2];
          else rho = 0.0;

          auto rowN = binom_row(uN, x);
          auto rowH = binom_row(uH, x);
          KahanSum inner;
          for (int gN = 0; gN < uN; ++gN) {
            if (rowN[gN] == 0) continue;
            for (int gH = 0; gH <= uH; ++gH) {
              if (rowH[gH] == 0) continue;
              inner += rowN[gN] * rowH[gH] * F(uN - gN, rho * p1pow[gN + gH]);
            }
          }
          sum += std::exp(la + ln) * inner.value();
        }
      }
    }
  }
  return sum.value();
}

// Zero when the conditioning event is impossible; the case sums only
// multiply such terms by zero-probability states.
double safe_ratio(double pi, int f, double pj, int g) {
  try {
    return ratio_term(pi, f, pj, g);
  } catch (const DegenerateConditioning&) {
    return 0.0;
  }
}

double safe_given_success(double lo, double hi) { return lo >= 1 ? 1.0 : cond_fail_given_success(lo, hi); }

double case_sums_given_a(int n, int a, double R1, double R2, double R3, const ChannelParams& ch) {
  const double p1 = link_failure(R1, ch), p2 = link_failure(R2, ch), p3 = link_failure(R3, ch);
  const double q21 = cond_fail_given_fail(p1, p2);
  const double q31 = cond_fail_given_fail(p1, p3);
  const double q32 = cond_fail_given_fail(p2, p3);
  const double r21 = safe_given_success(p1, p2);
  const double r31 = safe_given_success(p1, p3);
  const double r32 = safe_given_success(p2, p3);
  const double m312 = p2 > p1 ? cond_fail_between(p1, p2, p3) : 0.0;
  auto P = [](double p, int k) { return ipow(p, k); };

  KahanSum t;
  switch (uplink_rate_case(R1, R2, R3)) {
    case 1:
      for (int b2 = 0; b2 < n - a; ++b2)
        for (int b1 = 0; b1 < n - a - b2; ++b1) {
          int b = b1 + b2;
          for (int c3 = 0; c3 < n - a - b; ++c3)
            for (int c2 = 0; c2 < n - a - b - c3; ++c2)
              t += F(n - a - b - c2 - c3, P(p1, b1 + c2)) * B(n - a - b - c3, c2, P(q21, a + b2 + c3)) *
                   B(n - a - b, c3, q32) * B(n - a - b2, b1, P(p1, a + b2)) * B(n - a, b2, q21);
        }
      break;
    case 2:
      for (int b2 = 0; b2 < n - a; ++b2)
        for (int b1 = 0; b1 < n - a - b2; ++b1) {
          int b = b1 + b2;
          for (int hb2 = 0; hb2 <= b2; ++hb2)
            for (int hb1 = 0; hb1 <= b1; ++hb1)
              for (int c2 = 0; c2 < n - a - b; ++c2)
                t += F(n - a - b - c2, P(p1, hb1 + c2)) * B(n - a - b, c2, P(q21, a + hb2)) *
                     B(n - a - b2, b1, P(p1, a + b2)) * B(b1, hb1, safe_ratio(p2, a + hb2, p2, a + b2)) *
                     B(b2, hb2, r32) * B(n - a, b2, q21);
        }
      break;
    case 3:
      for (int a3 = 0; a3 <= a; ++a3)
        for (int b2 = 0; b2 < n - a; ++b2)
          for (int b1 = 0; b1 < n - a - b2; ++b1) {
            int b = b1 + b2;
            for (int hb1 = 0; hb1 <= b1; ++hb1)
              for (int c2 = 0; c2 < n - a - b; ++c2)
                t += F(n - a - b - c2, P(p1, hb1 + c2)) * B(n - a - b, c2, P(q21, a3)) *
                     B(b1, hb1, safe_ratio(p2, a3, p2, a + b2)) * B(n - a - b2, b1, P(p1, a + b2)) *
                     B(a, a3, r31) * B(n - a, b2, q21);
          }
      break;
    case 4:
      for (int a2 = 0; a2 <= a; ++a2) {
        int a1 = a - a2;
        for (int a3 = 0; a3 <= a2; ++a3)
          for (int ha1 = 0; ha1 <= a1; ++ha1)
            for (int b1 = 0; b1 < n - a; ++b1)
              for (int hb1 = 0; hb1 <= b1; ++hb1)
                t += F(n - a - b1, P(p1, ha1 + hb1)) * B(a1, ha1, P(p2, a3)) *
                     B(b1, hb1, safe_ratio(p2, a3, p1, a2)) * B(n - a, b1, P(p1, a2)) * B(a2, a3, r32) *
                     B(a, a2, r21);
      }
      break;
    case 5:
      for (int a2 = 0; a2 <= a; ++a2)
        for (int ta1 = 0; ta1 <= a - a2; ++ta1)
          for (int ha1 = 0; ha1 <= a - a2 - ta1; ++ha1)
            for (int b1 = 0; b1 < n - a; ++b1)
              for (int hb1 = 0; hb1 <= b1; ++hb1)
                t += F(n - a - b1, P(p1, ha1 + hb1)) * B(a - ta1 - a2, ha1, P(p2, ta1 + a2)) *
                     B(b1, hb1, safe_ratio(p2, a2, p1, a2)) * B(n - a, b1, P(p1, a2)) *
                     B(a - a2, ta1, m312) * B(a, a2, r21);
      break;
    case 6:
      // b reads as b1: this case has no second B set.
      for (int a2 = 0; a2 <= a; ++a2) {
        int a1 = a - a2;
        for (int b1 = 0; b1 < n - a; ++b1) {
          int b = b1;
          for (int hb1 = 0; hb1 <= b1; ++hb1)
            for (int c3 = 0; c3 < n - a - b1; ++c3)
              for (int c2 = 0; c2 < n - a - b1 - c3; ++c2)
                for (int hc2 = 0; hc2 <= c2; ++hc2)
                  t += F(n - a - b - c2 - c3, P(p1, hb1 + hc2)) * B(c2, hc2, safe_ratio(p2, a + c3, p1, a + c3)) *
                       B(b1, hb1, safe_ratio(p2, a2, p1, a2)) * B(n - a - b1, c3, q31) *
                       B(n - a - b - c3, c2, P(p1, a1 + c3)) * B(n - a, b1, P(p1, a2)) * B(a, a2, r21);
        }
      }
      break;
    default:
      throw CaseDispatchGap("no rate ordering matched");
  }
  return t.value();
}

}  // namespace

double one_hop_downlink(int n, double p_d) { return F(n, p_d); }
double one_hop_uplink(int n, double p_u) { return F(n, p_u); }

double two_hop_fixed_downlink(int n, double p1, double p2) {
  std::vector<double> p2v(n + 1, p2);
  return two_hop_adaptive_downlink(n, p1, p2v);
}

double two_hop_adaptive_downlink(int n, double p1, span<const double> p2_of_a) {
  require_size(p2_of_a, n, "p2_of_a");
  KahanSum s;
  for (int a = 0; a < n; ++a) {
    double pa = B(n, a, p1);
    if (pa == 0) continue;
    double p2 = p2_of_a[a];
    s += pa * F(n - a, ipow(p2, a) * cond_fail_given_fail(p1, p2));
  }
  return clamp01(s.value());
}

double three_hop_downlink(int n, double p1, span<const double> p2_of_a, span<const double> p3_of_a) {
  require_size(p2_of_a, n, "p2_of_a");
  require_size(p3_of_a, n, "p3_of_a");
  KahanSum s;
  for (int a = 0; a < n; ++a) {
    double pa = B(n, a, p1);
    if (pa == 0) continue;
    double p2 = p2_of_a[a], p3 = p3_of_a[a];
    double q21 = cond_fail_given_fail(p1, p2);
    double q32 = cond_fail_given_fail(p2, p3);
    double q321 = cond_fail_given_fail(std::min(p1, p2), p3);
    int M = n - a;
    double stay = ipow(p2, a) * q21;
    double q32a = ipow(q32, a) * q321;
    auto row = binom_row(M, stay);
    for (int b = 0; b < M; ++b) {
      if (row[b] == 0) continue;
      s += pa * row[b] * F(M - b, ipow(p3, b) * q32a);
    }
  }
  return clamp01(s.value());
}

double two_hop_uplink(int n, double r1, span<const double> r2_of_a, const ChannelParams& ch) {
  require_size(r2_of_a, n, "r2_of_a");
  const double p1 = link_failure(r1, ch);
  if (p1 >= 1) return 1.0;
  KahanSum s;
  for (int a = 0; a < n; ++a) {
    double pa = B(n, a, p1);
    if (pa == 0) continue;
    const double r2 = r2_of_a[a];
    const double p2 = link_failure(r2, ch);
    const int M = n - a;
    KahanSum t;
    if (r2 >= r1) {
      // Only phase-I winners can still reach the controller; each keeps its
      // link at the higher rate with probability 1 - q.
      double q = cond_fail_given_success(p1, p2);
      for (int a2 = 0; a2 <= a; ++a2) t += B(a, a2, q) * F(M, ipow(p1, a2));
    } else {
      // The lower rate opens the controller link to some phase-I losers.
      double keep_failing = cond_fail_given_fail(p1, p2);
      for (int b2 = 0; b2 < M; ++b2) t += B(M, b2, keep_failing) * F(M - b2, ipow(p1, a + b2));
    }
    s += pa * t.value();
  }
  return clamp01(s.value());
}

double three_hop_uplink(int n, double r1, span<const double> r2_of_a, span<const double> r3_of_a,
                        const ChannelParams& ch) {
  require_size(r2_of_a, n, "r2_of_a");
  require_size(r3_of_a, n, "r3_of_a");
  const double p1 = link_failure(r1, ch);
  if (p1 >= 1) return 1.0;
  KahanSum s;
  for (int a = 0; a < n; ++a) {
    double pa = B(n, a, p1);
    if (pa == 0) continue;
    double p2 = link_failure(r2_of_a[a], ch), p3 = link_failure(r3_of_a[a], ch);
    s += pa * three_hop_uplink_given_a(n, a, p1, p2, p3);
  }
  return clamp01(s.value());
}

int uplink_rate_case(double R1, double R2, double R3) {
  if (R1 >= R2 && R2 > R3) return 1;
  if (R1 > R3 && R3 >= R2) return 2;
  if (R3 >= R1 && R1 > R2) return 3;
  if (R3 > R2 && R2 >= R1) return 4;
  if (R2 >= R3 && R3 > R1) return 5;
  if (R2 > R1 && R1 >= R3) return 6;
  if (R1 == R2 && R2 == R3) return 1;
  throw CaseDispatchGap("rates are not comparable");
}

double three_hop_uplink_case_sums(int n, double r1, span<const double> r2_of_a, span<const double> r3_of_a,
                                  const ChannelParams& ch) {
  require_size(r2_of_a, n, "r2_of_a");
  require_size(r3_of_a, n, "r3_of_a");
  const double p1 = link_failure(r1, ch);
  if (p1 >= 1) return 1.0;
  KahanSum s;
  for (int a = 0; a < n; ++a) {
    double pa = B(n, a, p1);
    if (pa == 0) continue;
    s += pa * case_sums_given_a(n, a, r1, r2_of_a[a], r3_of_a[a], ch);
  }
  return clamp01(s.value());
}

double star_downlink_failure(const ScenarioConfig& cfg, const PhaseRates& r) {
  const auto& ch = cfg.channel;
  const int n = r.n;
  const double p1 = link_failure(r.d1, ch);
  switch (hop_count(cfg.protocol)) {
    case 1: return one_hop_downlink(n, p1);
    case 2: {
      std::vector<double> p2(n + 1);
      for (int a = 0; a <= n; ++a) p2[a] = link_failure(r.d2[a], ch);
      return two_hop_adaptive_downlink(n, p1, p2);
    }
    case 3: {
      std::vector<double> p2(n + 1), p3(n + 1);
      for (int a = 0; a <= n; ++a) {
        p2[a] = link_failure(r.d2[a], ch);
        p3[a] = link_failure(r.d3[a], ch);
      }
      return three_hop_downlink(n, p1, p2, p3);
    }
  }
  throw std::invalid_argument("not a star relaying protocol");
}

double star_uplink_failure(const ScenarioConfig& cfg, const PhaseRates& r) {
  const auto& ch = cfg.channel;
  switch (hop_count(cfg.protocol)) {
    case 1: return one_hop_uplink(r.n, link_failure(r.u1, ch));
    case 2: return two_hop_uplink(r.n, r.u1, r.u2, ch);
    case 3: return three_hop_uplink(r.n, r.u1, r.u2, r.u3, ch);
  }
  throw std::invalid_argument("not a star relaying protocol");
}

double ack_dissemination_failure(const ScenarioConfig& cfg, const PhaseRates& r) {
  if (!is_adaptive(cfg.protocol) || cfg.ideal_scheduling || r.ack_rounds == 0) return 0.0;
  // Every radio, controller included, originates one ACK packet that all
  // others must decode.
  const int N = cfg.topology.total_nodes();
  const double p = link_failure(r.s, cfg.channel);
  return r.ack_rounds == 3 ? union_bound_3hop(N, N, N - 1, p) : union_bound_2hop(N, N, N - 1, p);
}

StarBreakdown star_cycle_failure(const ScenarioConfig& cfg, bool allow_dead_phases) {
  if (cfg.topology.kind != TopologyKind::star) throw std::invalid_argument("star topology required");
  PhaseRates r = phase_rates(cfg, allow_dead_phases);
  StarBreakdown b;
  b.p_downlink = star_downlink_failure(cfg, r);
  b.p_uplink = star_uplink_failure(cfg, r);
  b.p_scheduling = ack_dissemination_failure(cfg, r);
  b.p_cycle_bound = std::min(1.0, b.p_downlink + b.p_uplink + b.p_scheduling);
  return b;
}

}  // namespace occow
