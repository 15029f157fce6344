#include <doctest.h>

#include <cmath>
#include <sstream>

#include "occow/analytic_generic.hpp"
#include "occow/analytic_star.hpp"
#include "occow/simulator.hpp"

using namespace occow;

namespace {

double z_score(std::uint64_t k, std::uint64_t n, double analytic) {
  double se = wilson_halfwidth(k, n) / 1.959963984540054;
  return (static_cast<double>(k) / static_cast<double>(n) - analytic) / se;
}

}  // namespace

TEST_CASE("trial streams depend only on seed and trial") {
  TrialRng a(7, 11), b(7, 11), c(7, 12), d(8, 11);
  std::uint64_t x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  CHECK(x != d.next());
}

TEST_CASE("uniform and exponential draws") {
  TrialRng r(1, 0);
  double sum = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    double u = r.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    sum += r.exponential();
  }
  CHECK(sum / N == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("fade matrices are symmetric") {
  TrialRng r(3, 4);
  auto f = FadeMatrix::draw(6, r);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(f.gain(i, j) == f.gain(j, i));
  FadeMatrix g(3, 2.0);
  g.set(0, 2, 5.0);
  CHECK(g.gain(2, 0) == 5.0);
  CHECK(g.gain(0, 1) == 2.0);
}

TEST_CASE("stream pairs") {
  auto star = stream_pairs(TopologySpec{TopologyKind::star, 3, 6, 1});
  REQUIRE(star.size() == 6);
  CHECK(star[0].source == 0);
  CHECK(star[0].destination == 1);
  CHECK(star[5].source == 3);
  CHECK(star[5].destination == 0);
  auto gen = stream_pairs(TopologySpec{TopologyKind::generic, 3, 4, 2});
  CHECK(gen.size() == 8);
  for (auto& p : gen) CHECK(p.source != p.destination);
}

TEST_CASE("perfect and dead channels") {
  for (Protocol p : {Protocol::one_hop, Protocol::fixed_2hop, Protocol::adaptive_3hop}) {
    auto c = make_star(4, p, 0.0);
    c.ideal_scheduling = true;
    auto good = simulate_cycle(c, FadeMatrix(5, 1e6));
    CHECK_FALSE(good.cycle_failed);
    for (auto& pr : good.pairs) CHECK(pr.success_hop == 1);
    auto dead = simulate_cycle(c, FadeMatrix(5, 0.0));
    CHECK(dead.cycle_failed);
    CHECK(dead.downlink_failed);
    CHECK(dead.uplink_failed);
  }
}

TEST_CASE("a relay repairs a blocked controller link") {
  // Node 1 cannot reach the controller directly but hears node 2.
  auto c = make_star(2, Protocol::fixed_2hop, 0.0);
  FadeMatrix f(3, 1.0);
  f.set(0, 1, 1e-6);
  auto o = simulate_cycle(c, f);
  CHECK_FALSE(o.cycle_failed);
  CHECK(o.pairs[0].success_hop == 2);  // controller -> 1
  CHECK(o.pairs[1].success_hop == 1);  // controller -> 2
  CHECK(o.pairs[2].success_hop == 2);  // 1 -> controller
  auto one = make_star(2, Protocol::one_hop, 0.0);
  CHECK(simulate_cycle(one, f).cycle_failed);
}

TEST_CASE("a node without the schedule sits out the retransmissions") {
  // Chain 1 - 2 - controller - 3: nodes 1 and 3 are three ACK hops apart.
  auto c = make_star(3, Protocol::adaptive_2hop, 0.0);
  c.phases.scheduling = 0.001;
  c.phases.downlink_budget_s = c.phases.uplink_budget_s = 0;
  apply_default_budgets(c);
  FadeMatrix f(4, 1e-6);
  f.set(1, 2, 1e3);
  f.set(0, 2, 1e3);
  f.set(0, 3, 1e3);
  auto o = simulate_cycle(c, f);
  CHECK(o.scheduling_disseminated[0]);
  CHECK_FALSE(o.scheduling_disseminated[1]);
  CHECK(o.scheduling_disseminated[2]);
  CHECK_FALSE(o.scheduling_disseminated[3]);
  CHECK(o.pairs[0].success_hop == 0);
  CHECK(o.downlink_failed);
  c.ideal_scheduling = true;
  auto ideal = simulate_cycle(c, f);
  CHECK(ideal.pairs[0].success_hop == 2);
  CHECK_FALSE(ideal.downlink_failed);
}

TEST_CASE("trace lists every phase") {
  auto c = make_star(3, Protocol::adaptive_3hop, 0.0);
  c.phases.scheduling = 0.05;
  c.phases.downlink_budget_s = c.phases.uplink_budget_s = 0;
  apply_default_budgets(c);
  std::ostringstream os;
  simulate_trial(c, 5, 0, &os);
  std::string t = os.str();
  for (const char* ph : {"phase=D1", "phase=U1", "phase=S1", "phase=S3", "phase=D2", "phase=D3"})
    CHECK(t.find(ph) != std::string::npos);
}

TEST_CASE("counts do not depend on the thread count") {
  auto c = make_star(4, Protocol::adaptive_3hop, -3.0);
  c.ideal_scheduling = true;
  auto one = count_events(c, 20000, 99, 1);
  auto four = count_events(c, 20000, 99, 4);
  CHECK(one.cycle == four.cycle);
  CHECK(one.downlink == four.downlink);
  CHECK(one.uplink == four.uplink);
  CHECK(count_failures(c, 20000, 99, FailureEvent::uplink, 3).failures == one.uplink);
  auto other = count_events(c, 20000, 100, 1);
  CHECK(other.cycle != one.cycle);
}

TEST_CASE("Monte Carlo agrees with the exact star engines") {
  for (Protocol p : {Protocol::fixed_2hop, Protocol::adaptive_3hop}) {
    auto c = make_star(3, p, -5.0);
    c.ideal_scheduling = true;
    auto b = star_cycle_failure(c);
    REQUIRE(b.p_downlink > 1e-3);
    auto e = count_events(c, 100000, 2024, 1);
    CHECK(std::abs(z_score(e.downlink, e.trials, b.p_downlink)) <= 3);
    CHECK(std::abs(z_score(e.uplink, e.trials, b.p_uplink)) <= 3);
    CHECK(z_score(e.cycle, e.trials, b.p_cycle_bound) <= 3);
  }
}

TEST_CASE("union bounds dominate the simulated baselines") {
  auto g = make_star(5, Protocol::fixed_2hop, -2.0);
  g.topology = TopologySpec{TopologyKind::generic, 6, 12, 2};
  std::vector<ScenarioConfig> cfgs{g};
  auto s = make_star(5, Protocol::nonsim_relay, 4.0);
  s.phases.downlink = s.phases.uplink = even_split(1);
  s.knobs.hops = 2;
  s.knobs.relays = 2;
  cfgs.push_back(s);
  auto fh = s;
  fh.protocol = Protocol::freq_hop;
  fh.knobs = {};
  fh.knobs.subchannels = 3;
  cfgs.push_back(fh);
  auto dc = s;
  dc.protocol = Protocol::duty_cycled;
  dc.knobs = {};
  dc.knobs.duty_pct = 50;
  cfgs.push_back(dc);
  for (auto& c : cfgs) {
    double bound = generic_failure(c).p;
    auto e = count_events(c, 50000, 7, 1);
    CAPTURE(to_string(c.protocol));
    CHECK(e.cycle > 0);
    CHECK(z_score(e.cycle, e.trials, bound) <= 3);
  }
}

TEST_CASE("estimates carry a Wilson interval") {
  auto c = make_star(2, Protocol::one_hop, 0.0);
  auto f = estimate_failure(c, 5000, 1);
  CHECK(f.source == Source::monte_carlo);
  CHECK(f.ci_halfwidth > 0);
  // Wilson half-width for 10 of 100.
  double z = 1.959963984540054, n = 100, ph = 0.1;
  double want = z / (1 + z * z / n) * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n));
  CHECK(wilson_halfwidth(10, 100) == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS(estimate_failure(c, 0, 1));
}
