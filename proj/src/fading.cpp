#include "occow/fading.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace occow {

namespace {

constexpr int kTable = 2048;

const std::array<double, kTable>& log_factorial_table() {
  static const std::array<double, kTable> t = [] {
    std::array<double, kTable> v{};
    v[0] = 0.0;
    for (int i = 1; i < kTable; ++i) v[i] = v[i - 1] + std::log(static_cast<double>(i));
    return v;
  }();
  return t;
}

}  // namespace

double log_factorial(int n) {
  if (n < kTable) return log_factorial_table()[n];
  double x = n + 1.0;
  // Stirling series; exact to double precision for n >= 2048.
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2 * M_PI) + 1.0 / (12 * x) - 1.0 / (360 * x * x * x);
}

double clamp01(double x) {
  if (!(x > 0)) return 0.0;
  return x < 1 ? x : 1.0;
}

double ipow(double p, int k) {
  if (k == 0) return 1.0;
  return std::pow(p, k);
}

LinkProb LinkProb::from_exponent(double x) {
  LinkProb lp;
  if (!(x > 0)) return lp;
  if (std::isinf(x)) {
    lp.p_fail = 1.0;
    lp.log_p_fail = 0.0;
    lp.log1m_p_fail = -std::numeric_limits<double>::infinity();
    return lp;
  }
  lp.p_fail = -std::expm1(-x);
  lp.log_p_fail = std::log(lp.p_fail);
  lp.log1m_p_fail = -x;
  return lp;
}

LinkProb link_failure_prob(double rate, const ChannelParams& ch) {
  if (rate <= 0) return LinkProb{};
  if (std::isinf(rate)) return LinkProb::from_exponent(std::numeric_limits<double>::infinity());
  double e = std::expm1(rate / ch.bandwidth_hz * M_LN2);
  if (std::isinf(ch.snr_linear)) return LinkProb{};
  return LinkProb::from_exponent(e / ch.snr_linear);
}

double link_failure(double rate, const ChannelParams& ch) { return link_failure_prob(rate, ch).p_fail; }

double cond_fail_given_fail(double p_lo, double p_hi) {
  if (p_lo <= 0) return p_hi;
  return std::min(p_hi / p_lo, 1.0);
}

double cond_fail_given_success(double p_lo, double p_hi) {
  if (p_lo >= 1) throw DegenerateConditioning("conditioning on success of a link that always fails");
  return clamp01((p_hi - p_lo) / (1.0 - p_lo));
}

double cond_fail_between(double p1, double p2, double p3) {
  if (!(p2 > p1)) throw DegenerateConditioning("empty capacity window R1 < C < R2");
  return clamp01((p3 - p1) / (p2 - p1));
}

double binom_pmf(int n, int m, double p) {
  if (m < 0 || m > n) return 0.0;
  if (p <= 0) return m == n ? 1.0 : 0.0;
  if (p >= 1) return m == 0 ? 1.0 : 0.0;
  double lc = log_factorial(n) - log_factorial(m) - log_factorial(n - m);
  return std::exp(lc + m * std::log1p(-p) + (n - m) * std::log(p));
}

std::vector<double> binom_row(int n, double p) {
  std::vector<double> row(n + 1, 0.0);
  if (p <= 0) {
    row[n] = 1.0;
    return row;
  }
  if (p >= 1) {
    row[0] = 1.0;
    return row;
  }
  double ls = std::log1p(-p), lf = std::log(p), ln = log_factorial(n);
  for (int m = 0; m <= n; ++m)
    row[m] = std::exp(ln - log_factorial(m) - log_factorial(n - m) + m * ls + (n - m) * lf);
  return row;
}

double at_least_one_fails(int n, double p) {
  if (n <= 0 || p <= 0) return 0.0;
  if (p >= 1) return 1.0;
  double v = -std::expm1(n * std::log1p(-p));
  return std::min(v, n * p);
}

double ratio_term(double p_i, int f, double p_j, int g) {
  double den = g == 0 ? 0.0 : -std::expm1(g * std::log(p_j));
  if (!(den > 0)) throw DegenerateConditioning("ratio term with an impossible conditioning event");
  double num = f == 0 ? 0.0 : -std::expm1(f * std::log(p_i));
  return clamp01(num / den);
}

}  // namespace occow
