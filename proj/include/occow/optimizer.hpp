#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "occow/analytic_star.hpp"
#include "occow/scenario.hpp"

namespace occow {

struct SnrSearchSpec {
  double target = 1e-9;
  double low_db = -20.0;
  double high_db = 60.0;
  double tolerance_db = 0.05;
  bool prescan = true;   // 1 dB monotonicity scan before bisecting
};

// The search runs on the lattice low_db + k * tolerance_db, so results are
// reproducible bit for bit and re-evaluating the engine at the returned SNR
// gives the same probability.
struct SnrResult {
  double snr_db = 0.0;
  double p_fail = 0.0;
  bool at_lower_bracket = false;
};

class InfeasibleBracket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonMonotoneScan : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SnrObjective = std::function<double(double snr_db)>;

double lattice_snr(const SnrSearchSpec& spec, long k);
SnrResult min_snr(const SnrObjective& f, const SnrSearchSpec& spec);

ScenarioConfig with_snr_db(ScenarioConfig cfg, double snr_db);

// Failure probability the optimizers minimise SNR for: the star cycle bound
// for star relaying protocols, the generic bound otherwise.
double scheme_failure(const ScenarioConfig& cfg);
SnrResult min_snr(const ScenarioConfig& cfg, const SnrSearchSpec& spec);

enum class Side { downlink, uplink };

struct AllocationGrid {
  double step = 0.02;
};

struct PhaseAllocation {
  std::array<double, 3> fractions{1.0, 0.0, 0.0};
  double snr_db = 0.0;
  double p_fail = 0.0;
  int evaluated = 0;
};

// Exhaustive search over the simplex of one side's phase fractions (phases
// beyond the protocol's hop count stay 0). Ties on the SNR lattice go to the
// most even split, then to the lexicographically largest fractions.
PhaseAllocation optimize_phase_allocation(const ScenarioConfig& cfg, const AllocationGrid& grid, Side side,
                                          const SnrSearchSpec& spec);

double side_failure(const ScenarioConfig& cfg, Side side);

struct StarOptimum {
  PhaseAllocation downlink;
  PhaseAllocation uplink;
  ScenarioConfig config;   // with both optimal splits applied
  SnrResult combined;
  StarBreakdown breakdown;
};

// Optimises each side against half the target, then searches the SNR that
// brings the full cycle bound under the target.
StarOptimum optimize_star(const ScenarioConfig& cfg, const AllocationGrid& grid, const SnrSearchSpec& spec);

struct ParamChoice {
  int best = 0;
  double snr_db = 0.0;
  bool at_boundary = false;
  std::vector<std::pair<int, double>> curve;   // NaN where the bracket is infeasible
};

// Ties on the SNR lattice go to the lower failure probability at that SNR,
// then to the smaller value.
// Non-simultaneous relaying over r in [r_lo, r_hi].
ParamChoice optimize_relay_count(const ScenarioConfig& cfg, int r_lo, int r_hi, const SnrSearchSpec& spec);
// Frequency hopping over k_fh in [k_lo, k_hi].
ParamChoice optimize_subchannels(const ScenarioConfig& cfg, int k_lo, int k_hi, const SnrSearchSpec& spec);

struct HopChoice {
  int best_hops = 1;
  double snr_db = 0.0;
  std::array<std::optional<double>, 3> per_hops;
};

// Even splits per hop count; adaptive configs compare the adaptive variants.
HopChoice choose_hops(const ScenarioConfig& cfg, const std::vector<int>& candidates, const SnrSearchSpec& spec);

struct DestPoint {
  int destinations = 0;   // 0 is the star reference
  double snr_db = 0.0;
};

// Generic n-node topology with s = 2n streams and fixed two-hop relaying at
// the star's per-slot rate, for d = 1 .. n-1, preceded by the star value.
std::vector<DestPoint> dest_sweep(const ScenarioConfig& star_cfg, const SnrSearchSpec& spec);

enum class Scheme {
  one_hop,
  harq,
  nonsim_best,
  freq_hop_best,
  fixed_2hop,
  fixed_3hop,
  adaptive_2hop,
  adaptive_3hop,
  adaptive_3hop_opt
};

std::string_view to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view s);

struct SweepRow {
  Scheme scheme;
  int n = 0;
  std::optional<double> min_snr_db;
  std::optional<int> inner_param;
};

struct SweepOptions {
  int nonsim_hops = 2;
  int max_subchannels = 200;
  AllocationGrid grid;
};

// One minimum SNR per (n, scheme) on the star scenario given as template.
SweepRow sweep_point(const ScenarioConfig& tmpl, int n, Scheme scheme, const SnrSearchSpec& spec,
                     const SweepOptions& opt = {});
std::vector<SweepRow> sweep_min_snr(const ScenarioConfig& tmpl, int n_lo, int n_hi,
                                    const std::vector<Scheme>& schemes, const SnrSearchSpec& spec,
                                    const SweepOptions& opt = {});

struct PowerPoint {
  double duty_pct = 0.0;
  int relays = 0;
  double realized_duty_pct = 0.0;   // 100 r / (n - 2): the awake share actually needed
  double awake_tx_snr_db = 0.0;
  double avg_tx_power_db = 0.0;
  double avg_total_power_db = 0.0;
};

class InfeasibleDuty : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Duty-cycled two-hop relaying on the star scenario. Power is averaged in
// linear units over the realized awake share; background_db may be -inf.
std::vector<PowerPoint> power_curve(const ScenarioConfig& star_cfg, const std::vector<double>& duty_grid,
                                    double background_db, const SnrSearchSpec& spec);

// Index of the lowest average total power; ties go to the earlier grid point.
std::size_t power_minimizer(const std::vector<PowerPoint>& curve);

ScenarioConfig baseline_config(const ScenarioConfig& star_cfg, Protocol protocol);

}  // namespace occow
