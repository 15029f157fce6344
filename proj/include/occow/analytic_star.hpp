#pragma once

#include <span>
#include <stdexcept>

#include "occow/fading.hpp"
#include "occow/scenario.hpp"

namespace occow {

// Failure probabilities of one direction of a star cycle. Downlink engines take
// link-failure probabilities; uplink engines take rates because their case
// structure depends on how the phase rates compare, not only on the p values.
// Adaptive inputs are indexed by the phase-I success count a (size >= n).

double one_hop_downlink(int n, double p_d);
double one_hop_uplink(int n, double p_u);

double two_hop_fixed_downlink(int n, double p1, double p2);
double two_hop_adaptive_downlink(int n, double p1, std::span<const double> p2_of_a);
double three_hop_downlink(int n, double p1, std::span<const double> p2_of_a,
                          std::span<const double> p3_of_a);

double two_hop_uplink(int n, double r1, std::span<const double> r2_of_a, const ChannelParams& ch);

// Exact three-hop uplink. Nodes are classified by the capacity of their link
// to the controller; a packet that missed the controller in phase I is lost
// only if none of its phase-I listeners reaches the controller in phase II and
// no node that heard one of them in phase II reaches it in phase III.
double three_hop_uplink(int n, double r1, std::span<const double> r2_of_a,
                        std::span<const double> r3_of_a, const ChannelParams& ch);

class CaseDispatchGap : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Rate ordering case 1..6 of the three-hop uplink:
//   1: R1 >= R2 > R3   2: R1 > R3 >= R2   3: R3 >= R1 > R2
//   4: R3 > R2 >= R1   5: R2 >= R3 > R1   6: R2 > R1 >= R3
// R1 = R2 = R3 is not covered by any of the six and is sent to case 1.
int uplink_rate_case(double r1, double r2, double r3);

// Six-case nested sums in their commonly quoted form. Kept for comparison; it is
// not exact (see the README), so the cycle analysis uses three_hop_uplink.
double three_hop_uplink_case_sums(int n, double r1, std::span<const double> r2_of_a,
                                  std::span<const double> r3_of_a, const ChannelParams& ch);

struct StarBreakdown {
  double p_downlink = 0.0;
  double p_uplink = 0.0;
  double p_scheduling = 0.0;
  double p_cycle_bound = 0.0;
};

double star_downlink_failure(const ScenarioConfig& cfg, const PhaseRates& rates);
double star_uplink_failure(const ScenarioConfig& cfg, const PhaseRates& rates);
// Union bound on any node missing any ACK packet; 0 for fixed schedules and
// under ideal scheduling.
double ack_dissemination_failure(const ScenarioConfig& cfg, const PhaseRates& rates);

StarBreakdown star_cycle_failure(const ScenarioConfig& cfg, bool allow_dead_phases = false);

}  // namespace occow
