#pragma once

#include "occow/fading.hpp"
#include "occow/scenario.hpp"

namespace occow {

// Per message-destination pair failure with a uniform link failure p and
// `relays` candidate relays (1 - q_s).
double pair_failure_2hop(double p, int relays);
double pair_failure_3hop(double p, int relays);

// s * d * (1 - q_s) over a network of n nodes (n - 2 candidate relays), clamped to 1.
double union_bound_2hop(int n, int s, int d, double p);
double union_bound_3hop(int n, int s, int d, double p);

// Uniform rate when every stream gets `slots` dedicated transmissions.
double slotted_rate(int s, double message_bits, double cycle_time_s, int slots);

// Relays take turns: each packet occupies 1 + (k-1) r slots.
double nonsim_rate(int s, double message_bits, double cycle_time_s, int k, int r);
double nonsim_relay_failure(int n, int s, int d, double message_bits, double cycle_time_s, int k, int r,
                            const ChannelParams& ch);

// Repetition over k_fh independently faded sub-channels, each at spectral
// efficiency k_fh * R / W.
double freq_hop_failure(int s, int k_fh, double base_rate, const ChannelParams& ch);

// Awake relays per message for x percent duty in an n-node network.
int duty_relays(int n, double duty_pct);
double duty_cycle_failure(int n, int s, int d, double p, double duty_pct);

// Every message alone on the link for the whole cycle, no relaying.
double harq_failure(int s, double message_bits, double cycle_time_s, const ChannelParams& ch);

// Rate used by each analysed scheme on a generic (or baseline) scenario.
double scheme_rate(const ScenarioConfig& cfg);

// Bound for every scenario outside the star relaying engines: generic
// topologies with fixed 2/3-hop relaying and the three baselines.
FailureProbability generic_failure(const ScenarioConfig& cfg);

}  // namespace occow
