#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "occow/scenario.hpp"

namespace occow {

// Counter-based generator: the stream for (seed, trial) depends on nothing
// else, so trials can be spread over any number of workers.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial);
  std::uint64_t next();
  double uniform();       // in (0, 1]
  double exponential();   // mean 1

 private:
  std::uint64_t state_;
};

// Symmetric per-pair power gains |h|^2 for one cycle. Index 0 is the
// controller in a star.
class FadeMatrix {
 public:
  explicit FadeMatrix(int size, double fill = 1.0);
  int size() const { return size_; }
  double gain(int i, int j) const { return g_[static_cast<std::size_t>(i) * size_ + j]; }
  void set(int i, int j, double v);

  static FadeMatrix draw(int size, TrialRng& rng);

 private:
  int size_;
  std::vector<double> g_;
};

struct PairOutcome {
  int source = 0;
  int destination = 0;
  int success_hop = 0;   // 1, 2 or 3; 0 when the pair failed
};

struct CycleOutcome {
  std::vector<PairOutcome> pairs;
  std::vector<char> scheduling_disseminated;   // per radio
  bool downlink_failed = false;                 // star: any controller -> node pair
  bool uplink_failed = false;                   // star: any node -> controller pair
  bool cycle_failed = false;
};

// One cycle of the star relaying protocols (fixed or adaptive, 1 to 3 hops)
// on the given fades. Trace lines, if requested, list per phase and packet
// the transmitter set, the rate, and the receivers that newly decoded.
CycleOutcome simulate_cycle(const ScenarioConfig& cfg, const FadeMatrix& fades, std::ostream* trace = nullptr);

// Uniform-rate schemes: fixed relaying on generic topologies, non-simultaneous
// relaying, frequency hopping and duty cycling. Sub-channels beyond the first
// draw fresh fades from rng.
CycleOutcome simulate_baseline(const ScenarioConfig& cfg, const FadeMatrix& fades, TrialRng& rng,
                               std::ostream* trace = nullptr);

// Draws the trial's fades and runs the matching simulation.
CycleOutcome simulate_trial(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t trial,
                            std::ostream* trace = nullptr);

enum class FailureEvent { cycle, downlink, uplink };

struct TrialCounts {
  std::uint64_t failures = 0;
  std::uint64_t trials = 0;
};

struct EventCounts {
  std::uint64_t cycle = 0;
  std::uint64_t downlink = 0;
  std::uint64_t uplink = 0;
  std::uint64_t trials = 0;

  std::uint64_t of(FailureEvent e) const {
    return e == FailureEvent::cycle ? cycle : e == FailureEvent::downlink ? downlink : uplink;
  }
};

// All three events from one pass over the trials. Identical for any thread
// count; threads = 0 uses the hardware concurrency.
EventCounts count_events(const ScenarioConfig& cfg, std::uint64_t trials, std::uint64_t seed, unsigned threads = 0);

TrialCounts count_failures(const ScenarioConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                           FailureEvent event = FailureEvent::cycle, unsigned threads = 0);

FailureProbability estimate_failure(const ScenarioConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                                    FailureEvent event = FailureEvent::cycle, unsigned threads = 0);

// 95% Wilson score interval half-width for k successes in n trials.
double wilson_halfwidth(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

// Message-destination pairs of a topology; relay pools are taken per pair.
std::vector<PairOutcome> stream_pairs(const TopologySpec& t);

}  // namespace occow
