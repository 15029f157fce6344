#pragma once

#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace occow {

enum class TopologyKind { star, generic };

enum class Protocol {
  one_hop,
  fixed_2hop,
  adaptive_2hop,
  fixed_3hop,
  adaptive_3hop,
  nonsim_relay,
  freq_hop,
  duty_cycled
};

std::string_view to_string(Protocol p);
std::string_view to_string(TopologyKind k);
std::optional<Protocol> parse_protocol(std::string_view s);
std::optional<TopologyKind> parse_topology(std::string_view s);

// 1, 2 or 3 for the star relaying protocols, 0 for the baselines.
int hop_count(Protocol p);
bool is_adaptive(Protocol p);
bool is_cooperative(Protocol p);

struct ChannelParams {
  double snr_linear = 1.0;
  double bandwidth_hz = 20e6;

  double snr_db() const;
  static ChannelParams from_db(double snr_db, double bandwidth_hz);
};

struct TopologySpec {
  TopologyKind kind = TopologyKind::star;
  int n_nodes = 1;          // non-controller nodes for a star, all nodes otherwise
  int n_streams = 2;
  int avg_subscribers = 1;

  // Radios in the network; a star adds the controller.
  int total_nodes() const { return kind == TopologyKind::star ? n_nodes + 1 : n_nodes; }
};

struct PhasePlan {
  std::array<double, 3> downlink{1.0, 0.0, 0.0};
  std::array<double, 3> uplink{1.0, 0.0, 0.0};
  double scheduling = 0.0;       // f_S, fraction of the whole cycle
  double downlink_budget_s = 0.0;
  double uplink_budget_s = 0.0;
};

struct ProtocolKnobs {
  std::optional<int> relays;        // r, non-simultaneous relaying
  std::optional<int> hops;          // k in {2,3}, non-simultaneous relaying
  std::optional<int> subchannels;   // k_fh, frequency hopping
  std::optional<double> duty_pct;   // x, duty cycling
};

struct ScenarioConfig {
  TopologySpec topology;
  ChannelParams channel;
  double message_bits = 160;
  double cycle_time_s = 2e-3;
  Protocol protocol = Protocol::fixed_2hop;
  PhasePlan phases;
  ProtocolKnobs knobs;
  bool scheduling_overhead = true;  // +2n bits in adaptive downlink retransmissions
  bool ack_bit = true;              // (m+1) bits per node in adaptive uplink phase I
  bool ideal_scheduling = false;    // ACK dissemination is free and never fails
  bool three_hop_acks = true;       // ACKs use three dissemination rounds when hops = 3

  double scheduling_time_s() const { return phases.scheduling * cycle_time_s; }
};

// Star scenario with equal phase splits and the whole non-scheduling time
// shared equally between downlink and uplink.
ScenarioConfig make_star(int n, Protocol protocol, double snr_db = 10.0, double message_bits = 160,
                         double cycle_time_s = 2e-3, double bandwidth_hz = 20e6);

// Equal split across the first `hops` phases.
std::array<double, 3> even_split(int hops);

// Fills unset budgets with (1 - f_S) * T / 2 each.
void apply_default_budgets(ScenarioConfig& cfg);

enum class ConfigErrorKind {
  NonPositiveField,
  FractionSumMismatch,
  MissingProtocolKnob,
  UnexpectedProtocolKnob,
  InvalidTopology
};

std::string_view to_string(ConfigErrorKind k);

struct ConfigViolation {
  ConfigErrorKind kind;
  std::string field;
  std::string detail;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigViolation> v);
  const std::vector<ConfigViolation>& violations() const { return violations_; }

 private:
  std::vector<ConfigViolation> violations_;
};

std::vector<ConfigViolation> check(const ScenarioConfig& cfg);

// Returns the config unchanged if every invariant holds, throws ConfigError
// listing all violations otherwise.
const ScenarioConfig& validate(const ScenarioConfig& cfg);

enum class Source { analytic, monte_carlo };

struct FailureProbability {
  double p = 0.0;
  double log_p = -std::numeric_limits<double>::infinity();
  Source source = Source::analytic;
  double ci_halfwidth = 0.0;

  static FailureProbability analytic(double p);
  static FailureProbability monte_carlo(double p, double ci_halfwidth);
};

class ZeroPhaseTime : public std::domain_error {
 public:
  explicit ZeroPhaseTime(const std::string& field);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Rates in bits/s. Adaptive entries are indexed by the first-phase success
// count a in [0, n]; fixed schedules repeat the same value. A phase with no
// time carries +inf (the link then always fails), unless it has nothing to send.
struct PhaseRates {
  int n = 0;
  double d1 = 0;
  std::vector<double> d2, d3;
  double u1 = 0;
  std::vector<double> u2, u3;
  double s = 0;          // ACK dissemination rate, 0 when unused
  int ack_rounds = 0;    // dissemination rounds behind s
};

double rate_for(double bits, double seconds);

// Strict by default: a phase the protocol uses but gives zero time raises
// ZeroPhaseTime. The optimizer explores degenerate splits with allow_dead_phases.
PhaseRates phase_rates(const ScenarioConfig& cfg, bool allow_dead_phases = false);

}  // namespace occow
