#include "occow/simulator.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "occow/analytic_generic.hpp"
#include "occow/analytic_star.hpp"

namespace occow {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Capacities W log2(1 + g SNR), computed once per cycle.
class Capacity {
 public:
  Capacity(const FadeMatrix& f, const ChannelParams& ch) : n_(f.size()), c_(static_cast<std::size_t>(n_) * n_) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        c_[static_cast<std::size_t>(i) * n_ + j] =
            i == j ? 0.0 : ch.bandwidth_hz * std::log2(1.0 + f.gain(i, j) * ch.snr_linear);
  }
  bool ok(int i, int j, double rate) const { return rate <= c_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_;
  std::vector<double> c_;
};

void trace_line(std::ostream* os, const char* phase, const std::string& packet, const std::vector<int>& tx,
                double rate, const std::vector<int>& fresh) {
  if (!os) return;
  *os << "phase=" << phase << " packet=" << packet << " tx=";
  for (std::size_t k = 0; k < tx.size(); ++k) *os << (k ? "," : "") << tx[k];
  *os << " rate=" << rate << " new=";
  for (std::size_t k = 0; k < fresh.size(); ++k) *os << (k ? "," : "") << fresh[k];
  *os << '\n';
}

// Relays a packet between two ends of the slot structure used by every
// uniform-rate scheme: the source transmits, then `rounds` relay rounds over
// `pool`. Returns the hop at which dst decoded, 0 if never.
int relay_to(const Capacity& cap, int src, int dst, const std::vector<int>& pool, double rate, int rounds) {
  if (cap.ok(src, dst, rate)) return 1;
  std::vector<int> holders;
  std::vector<char> has(pool.size(), 0);
  for (std::size_t k = 0; k < pool.size(); ++k)
    if (cap.ok(src, pool[k], rate)) {
      has[k] = 1;
      holders.push_back(pool[k]);
    }
  for (int round = 1; round <= rounds; ++round) {
    for (int h : holders)
      if (cap.ok(h, dst, rate)) return round + 1;
    if (round == rounds) break;
    std::vector<int> fresh;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (has[k]) continue;
      for (int h : holders)
        if (cap.ok(h, pool[k], rate)) {
          fresh.push_back(static_cast<int>(k));
          break;
        }
    }
    for (int k : fresh) {
      has[k] = 1;
      holders.push_back(pool[k]);
    }
  }
  return 0;
}

std::vector<int> relay_pool(int nodes, int src, int dst, int r) {
  std::vector<int> pool;
  for (int step = 1; step < nodes && static_cast<int>(pool.size()) < r; ++step) {
    int v = (dst + step) % nodes;
    if (v != src && v != dst) pool.push_back(v);
  }
  return pool;
}

void finish(CycleOutcome& out, bool star) {
  out.cycle_failed = false;
  for (const auto& p : out.pairs) {
    if (p.success_hop != 0) continue;
    out.cycle_failed = true;
    if (star) (p.source == 0 ? out.downlink_failed : out.uplink_failed) = true;
  }
}

}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial)
    : state_(mix64(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL) ^ mix64(trial + 0xD1B54A32D192ED03ULL)) {}

std::uint64_t TrialRng::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

double TrialRng::uniform() { return ((next() >> 11) + 1) * 0x1.0p-53; }

double TrialRng::exponential() { return -std::log(uniform()); }

FadeMatrix::FadeMatrix(int size, double fill) : size_(size), g_(static_cast<std::size_t>(size) * size, fill) {}

void FadeMatrix::set(int i, int j, double v) {
  g_[static_cast<std::size_t>(i) * size_ + j] = v;
  g_[static_cast<std::size_t>(j) * size_ + i] = v;
}

FadeMatrix FadeMatrix::draw(int size, TrialRng& rng) {
  FadeMatrix f(size, 0.0);
  for (int i = 0; i < size; ++i)
    for (int j = i + 1; j < size; ++j) f.set(i, j, rng.exponential());
  return f;
}

std::vector<PairOutcome> stream_pairs(const TopologySpec& t) {
  std::vector<PairOutcome> pairs;
  if (t.kind == TopologyKind::star) {
    for (int i = 1; i <= t.n_nodes; ++i) pairs.push_back({0, i, 0});
    for (int i = 1; i <= t.n_nodes; ++i) pairs.push_back({i, 0, 0});
    return pairs;
  }
  const int N = t.total_nodes();
  for (int k = 0; k < t.n_streams; ++k) {
    int src = k % N;
    for (int j = 1; j <= t.avg_subscribers; ++j) pairs.push_back({src, (src + j) % N, 0});
  }
  return pairs;
}

CycleOutcome simulate_cycle(const ScenarioConfig& cfg, const FadeMatrix& fades, std::ostream* trace) {
  const int n = cfg.topology.n_nodes;
  const int N = n + 1;
  const int hops = hop_count(cfg.protocol);
  if (hops == 0 || cfg.topology.kind != TopologyKind::star)
    throw std::invalid_argument("simulate_cycle runs the star relaying protocols");
  if (fades.size() != N) throw std::invalid_argument("fade matrix size must be n + 1");
  const PhaseRates r = phase_rates(cfg, true);
  const Capacity cap(fades, cfg.channel);

  CycleOutcome out;
  out.pairs = stream_pairs(cfg.topology);
  auto& down = out.pairs;  // [0, n) downlink to node i+1, [n, 2n) uplink from node i-n+1

  // Downlink phase I: the controller broadcasts every node's message at once.
  std::vector<char> has(N, 0);
  has[0] = 1;
  std::vector<int> fresh;
  for (int i = 1; i <= n; ++i)
    if (cap.ok(0, i, r.d1)) {
      has[i] = 1;
      down[i - 1].success_hop = 1;
      fresh.push_back(i);
    }
  trace_line(trace, "D1", "downlink", {0}, r.d1, fresh);
  const int a_down = static_cast<int>(fresh.size());

  // Uplink phase I: each node in its own slot; every radio listens.
  std::vector<std::vector<int>> holders(N);
  int a_up = 0;
  for (int i = 1; i <= n; ++i) {
    holders[i].push_back(i);
    fresh.clear();
    for (int v = 0; v < N; ++v) {
      if (v == i || !cap.ok(i, v, r.u1)) continue;
      fresh.push_back(v);
      if (v == 0) {
        out.pairs[n + i - 1].success_hop = 1;
        ++a_up;
      } else {
        holders[i].push_back(v);
      }
    }
    trace_line(trace, "U1", std::to_string(i), {i}, r.u1, fresh);
  }

  // ACK dissemination with the fixed schedule at the scheduling rate.
  std::vector<char> part(N, 1);
  if (is_adaptive(cfg.protocol) && !cfg.ideal_scheduling) {
    std::vector<int> missing(N, 0);
    for (int o = 0; o < N; ++o) {
      std::vector<char> got(N, 0);
      got[o] = 1;
      std::vector<int> tx{o};
      for (int round = 0; round < r.ack_rounds; ++round) {
        fresh.clear();
        for (int v = 0; v < N; ++v) {
          if (got[v]) continue;
          for (int t : tx)
            if (cap.ok(t, v, r.s)) {
              fresh.push_back(v);
              break;
            }
        }
        for (int v : fresh) {
          got[v] = 1;
          tx.push_back(v);
        }
        trace_line(trace, round == 0 ? "S1" : round == 1 ? "S2" : "S3", "ack" + std::to_string(o),
                   round == 0 ? std::vector<int>{o} : tx, r.s, fresh);
      }
      for (int v = 0; v < N; ++v)
        if (!got[v]) ++missing[v];
    }
    for (int v = 0; v < N; ++v) part[v] = missing[v] == 0;
  }
  out.scheduling_disseminated.assign(part.begin(), part.end());

  // Downlink retransmissions: all informed radios that know the schedule
  // transmit together.
  for (int k = 2; k <= hops; ++k) {
    double rate = k == 2 ? r.d2[a_down] : r.d3[a_down];
    std::vector<int> tx;
    for (int v = 0; v < N; ++v)
      if (has[v] && part[v]) tx.push_back(v);
    fresh.clear();
    for (int j = 1; j <= n; ++j) {
      if (has[j] || !part[j]) continue;
      for (int t : tx)
        if (cap.ok(t, j, rate)) {
          fresh.push_back(j);
          break;
        }
    }
    for (int j : fresh) {
      has[j] = 1;
      down[j - 1].success_hop = k;
    }
    trace_line(trace, k == 2 ? "D2" : "D3", "downlink", tx, rate, fresh);
  }

  // Uplink retransmissions, packet by packet.
  for (int i = 1; i <= n; ++i) {
    auto& pair = out.pairs[n + i - 1];
    if (pair.success_hop != 0) continue;
    std::vector<int> h = holders[i];
    std::vector<char> in(N, 0);
    for (int v : h) in[v] = 1;
    for (int k = 2; k <= hops; ++k) {
      double rate = k == 2 ? r.u2[a_up] : r.u3[a_up];
      std::vector<int> tx;
      for (int v : h)
        if (part[v]) tx.push_back(v);
      fresh.clear();
      if (part[0])
        for (int t : tx)
          if (cap.ok(t, 0, rate)) {
            fresh.push_back(0);
            pair.success_hop = k;
            break;
          }
      if (pair.success_hop == 0 && k < hops) {
        for (int v = 1; v <= n; ++v) {
          if (in[v] || !part[v]) continue;
          for (int t : tx)
            if (cap.ok(t, v, rate)) {
              fresh.push_back(v);
              break;
            }
        }
        for (int v : fresh) {
          in[v] = 1;
          h.push_back(v);
        }
      }
      trace_line(trace, k == 2 ? "U2" : "U3", std::to_string(i), tx, rate, fresh);
      if (pair.success_hop != 0) break;
    }
  }

  finish(out, true);
  return out;
}

CycleOutcome simulate_baseline(const ScenarioConfig& cfg, const FadeMatrix& fades, TrialRng& rng, std::ostream* trace) {
  const auto& t = cfg.topology;
  const int N = t.total_nodes();
  if (fades.size() != N) throw std::invalid_argument("fade matrix size must match the radio count");
  const bool star = t.kind == TopologyKind::star;
  const double rate = scheme_rate(cfg);

  CycleOutcome out;
  out.pairs = stream_pairs(t);
  out.scheduling_disseminated.assign(N, 1);

  if (cfg.protocol == Protocol::freq_hop) {
    const int k = cfg.knobs.subchannels.value();
    std::vector<Capacity> caps;
    caps.emplace_back(fades, cfg.channel);
    for (int c = 1; c < k; ++c) caps.emplace_back(FadeMatrix::draw(N, rng), cfg.channel);
    for (auto& p : out.pairs) {
      for (int c = 0; c < k && p.success_hop == 0; ++c)
        if (caps[c].ok(p.source, p.destination, rate)) p.success_hop = 1;
      if (trace)
        *trace << "phase=FH packet=" << p.source << "->" << p.destination << " subchannels=" << k
               << " rate=" << rate << " ok=" << (p.success_hop ? 1 : 0) << '\n';
    }
    finish(out, star);
    return out;
  }

  int relays = 0, rounds = 1;
  switch (cfg.protocol) {
    case Protocol::fixed_2hop: relays = N - 2; break;
    case Protocol::fixed_3hop: relays = N - 2; rounds = 2; break;
    case Protocol::nonsim_relay:
      relays = cfg.knobs.relays.value();
      rounds = cfg.knobs.hops.value() - 1;
      break;
    case Protocol::duty_cycled: relays = duty_relays(N, cfg.knobs.duty_pct.value()); break;
    default: throw std::invalid_argument("not a uniform-rate scheme");
  }
  const Capacity cap(fades, cfg.channel);
  for (auto& p : out.pairs) {
    auto pool = relay_pool(N, p.source, p.destination, relays);
    p.success_hop = relay_to(cap, p.source, p.destination, pool, rate, rounds);
    if (trace) {
      *trace << "phase=R packet=" << p.source << "->" << p.destination << " pool=";
      for (std::size_t k = 0; k < pool.size(); ++k) *trace << (k ? "," : "") << pool[k];
      *trace << " rate=" << rate << " hop=" << p.success_hop << '\n';
    }
  }
  finish(out, star);
  return out;
}

CycleOutcome simulate_trial(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t trial, std::ostream* trace) {
  TrialRng rng(seed, trial);
  const int N = cfg.topology.total_nodes();
  FadeMatrix f = FadeMatrix::draw(N, rng);
  if (cfg.topology.kind == TopologyKind::star && is_cooperative(cfg.protocol)) return simulate_cycle(cfg, f, trace);
  return simulate_baseline(cfg, f, rng, trace);
}

EventCounts count_events(const ScenarioConfig& cfg, std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> cycle{0}, down{0}, up{0};
  auto work = [&] {
    std::uint64_t c = 0, d = 0, u = 0;
    for (;;) {
      std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) break;
      std::uint64_t end = std::min(trials, (b + 1) * kBlock);
      for (std::uint64_t t = b * kBlock; t < end; ++t) {
        CycleOutcome o = simulate_trial(cfg, seed, t);
        c += o.cycle_failed;
        d += o.downlink_failed;
        u += o.uplink_failed;
      }
    }
    cycle += c;
    down += d;
    up += u;
  };
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, blocks)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return EventCounts{cycle.load(), down.load(), up.load(), trials};
}

TrialCounts count_failures(const ScenarioConfig& cfg, std::uint64_t trials, std::uint64_t seed, FailureEvent event,
                           unsigned threads) {
  EventCounts e = count_events(cfg, trials, seed, threads);
  return TrialCounts{e.of(event), trials};
}

FailureProbability estimate_failure(const ScenarioConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                                    FailureEvent event, unsigned threads) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  TrialCounts c = count_failures(cfg, trials, seed, event, threads);
  double p = static_cast<double>(c.failures) / static_cast<double>(c.trials);
  return FailureProbability::monte_carlo(p, wilson_halfwidth(c.failures, c.trials));
}

double wilson_halfwidth(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return 1.0;
  double nn = static_cast<double>(n), ph = static_cast<double>(k) / nn, z2 = z * z;
  return z / (1.0 + z2 / nn) * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn));
}

}  // namespace occow
