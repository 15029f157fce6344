#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "occow/scenario.hpp"

namespace occow {

struct LinkProb {
  double p_fail = 0.0;
  double log_p_fail = -std::numeric_limits<double>::infinity();
  double log1m_p_fail = 0.0;

  // From the outage exponent x = (2^{R/W} - 1) / SNR, so that p = 1 - e^{-x}.
  static LinkProb from_exponent(double x);
};

class DegenerateConditioning : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Rayleigh single-tap outage: P(W log2(1 + |h|^2 SNR) < R) = 1 - exp(-(2^{R/W}-1)/SNR).
LinkProb link_failure_prob(double rate, const ChannelParams& ch);
double link_failure(double rate, const ChannelParams& ch);

// Capacity a link needs to carry `rate`, in the same units as W log2(1 + g SNR).
inline bool link_supports(double rate, double capacity) { return rate <= capacity; }

// P(C < R_hi | C < R_lo) given p_lo = P(C < R_lo), p_hi = P(C < R_hi).
double cond_fail_given_fail(double p_lo, double p_hi);
// P(C < R_hi | C > R_lo).
double cond_fail_given_success(double p_lo, double p_hi);
// P(C < R3 | R1 < C < R2).
double cond_fail_between(double p1, double p2, double p3);

// B(n, m, p): m successes out of n, each failing with probability p.
double binom_pmf(int n, int m, double p_fail);
// B(n, m, p) for m = 0..n.
std::vector<double> binom_row(int n, double p_fail);
// F(n, p) = 1 - (1 - p)^n.
double at_least_one_fails(int n, double p_fail);
// s_ij[f, g] = (1 - p_i^f) / (1 - p_j^g).
double ratio_term(double p_i, int f, double p_j, int g);

double log_factorial(int n);
double ipow(double p, int k);
double clamp01(double x);

// Neumaier compensated summation.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace occow
