#include <doctest.h>

#include <cmath>
#include <vector>

#include "occow/analytic_star.hpp"
#include "occow/scenario.hpp"
#include "oracle.hpp"

using namespace occow;

namespace {

ScenarioConfig star(int n, Protocol p, double snr_db) {
  auto c = make_star(n, p, snr_db);
  c.ideal_scheduling = true;
  if (hop_count(p) == 3) {
    c.phases.downlink = {0.5, 0.2, 0.3};
    c.phases.uplink = {0.2, 0.3, 0.5};
  } else if (hop_count(p) == 2) {
    c.phases.downlink = {0.6, 0.4, 0.0};
    c.phases.uplink = {0.35, 0.65, 0.0};
  }
  return c;
}

struct Pair {
  double engine, brute;
};

Pair compare(const ScenarioConfig& c, bool downlink) {
  auto r = phase_rates(c);
  auto o = oracle::star_rates(c);
  double e = downlink ? star_downlink_failure(c, r) : star_uplink_failure(c, r);
  double b = oracle::brute_star(c.topology.n_nodes, hop_count(c.protocol), downlink ? o.down : o.up,
                                c.channel.snr_linear, c.channel.bandwidth_hz, downlink);
  return {e, b};
}

}  // namespace

TEST_CASE("star engines equal exhaustive enumeration for small stars") {
  for (Protocol p : {Protocol::one_hop, Protocol::fixed_2hop, Protocol::adaptive_2hop, Protocol::fixed_3hop,
                     Protocol::adaptive_3hop})
    for (int n = 1; n <= 4; ++n)
      for (double db : {-4.0, 2.0})
        for (bool down : {true, false}) {
          auto c = star(n, p, db);
          auto [e, b] = compare(c, down);
          CAPTURE(to_string(p));
          CAPTURE(n);
          CAPTURE(db);
          CAPTURE(down);
          CHECK(std::abs(e - b) <= 1e-9);
          CHECK(b > 1e-7);
        }
}

TEST_CASE("three-hop star engines equal enumeration at n = 4") {
  for (Protocol p : {Protocol::fixed_3hop, Protocol::adaptive_3hop})
    for (bool down : {true, false}) {
      auto c = star(4, p, -2.0);
      auto [e, b] = compare(c, down);
      CAPTURE(to_string(p));
      CAPTURE(down);
      CHECK(std::abs(e - b) <= 1e-9);
    }
}

TEST_CASE("adaptive engines stay exact without the overhead bits") {
  auto c = star(3, Protocol::adaptive_3hop, 0.0);
  c.scheduling_overhead = c.ack_bit = false;
  for (bool down : {true, false}) {
    auto [e, b] = compare(c, down);
    CHECK(std::abs(e - b) <= 1e-9);
  }
}

TEST_CASE("uplink engines hold for every rate ordering") {
  // Phase splits chosen so that the three uplink rates cover each ordering.
  const std::vector<std::array<double, 3>> splits = {
      {0.5, 0.3, 0.2}, {0.5, 0.2, 0.3}, {0.2, 0.3, 0.5}, {0.2, 0.5, 0.3}, {0.3, 0.5, 0.2}, {0.3, 0.2, 0.5},
      {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  for (const auto& s : splits) {
    auto c = star(3, Protocol::fixed_3hop, -1.0);
    c.phases.uplink = s;
    auto [e, b] = compare(c, false);
    CHECK(std::abs(e - b) <= 1e-9);
  }
}

TEST_CASE("rate-ordering cases") {
  CHECK(uplink_rate_case(3, 2, 1) == 1);
  CHECK(uplink_rate_case(3, 1, 2) == 2);
  CHECK(uplink_rate_case(2, 1, 3) == 3);
  CHECK(uplink_rate_case(1, 2, 3) == 4);
  CHECK(uplink_rate_case(1, 3, 2) == 5);
  CHECK(uplink_rate_case(2, 3, 1) == 6);
  CHECK(uplink_rate_case(2, 2, 2) == 1);
  CHECK(uplink_rate_case(2, 2, 1) == 1);
  CHECK(uplink_rate_case(2, 1, 1) == 2);
}

TEST_CASE("three-hop uplink case sums overestimate the exact value") {
  auto c = make_star(3, Protocol::adaptive_3hop, 0.0);
  c.ideal_scheduling = true;
  auto r = phase_rates(c);
  auto o = oracle::star_rates(c);
  double brute = oracle::brute_star(3, 3, o.up, c.channel.snr_linear, c.channel.bandwidth_hz, false);
  double exact = three_hop_uplink(3, r.u1, r.u2, r.u3, c.channel);
  double case_sums = three_hop_uplink_case_sums(3, r.u1, r.u2, r.u3, c.channel);
  CHECK(std::abs(exact - brute) <= 1e-12);
  CHECK(case_sums > 2 * brute);
}

TEST_CASE("collapse: dead third phase gives the two-hop value") {
  for (int n : {1, 3, 6, 20}) {
    double p1 = 0.2;
    std::vector<double> p2(n + 1), dead(n + 1, 1.0);
    for (int a = 0; a <= n; ++a) p2[a] = 0.05 + 0.01 * a;
    CHECK(three_hop_downlink(n, p1, p2, dead) == doctest::Approx(two_hop_adaptive_downlink(n, p1, p2)).epsilon(1e-12));
  }
  auto ch = ChannelParams::from_db(0, 20e6);
  const double inf = std::numeric_limits<double>::infinity();
  for (int n : {2, 4, 9}) {
    std::vector<double> r2(n + 1), r3(n + 1, inf);
    for (int a = 0; a <= n; ++a) r2[a] = 2e6 + 1e5 * a;
    double three = three_hop_uplink(n, 3e6, r2, r3, ch);
    double two = two_hop_uplink(n, 3e6, r2, ch);
    CHECK(std::abs(three - two) <= 1e-9);
  }
}

TEST_CASE("collapse: dead second phase gives the one-hop value") {
  auto ch = ChannelParams::from_db(0, 20e6);
  const double inf = std::numeric_limits<double>::infinity();
  for (int n : {1, 4, 12}) {
    std::vector<double> dead(n + 1, 1.0), rdead(n + 1, inf);
    CHECK(two_hop_adaptive_downlink(n, 0.1, dead) == doctest::Approx(one_hop_downlink(n, 0.1)).epsilon(1e-12));
    CHECK(two_hop_fixed_downlink(n, 0.1, 1.0) == doctest::Approx(one_hop_downlink(n, 0.1)).epsilon(1e-12));
    double p = link_failure(3e6, ch);
    CHECK(std::abs(two_hop_uplink(n, 3e6, rdead, ch) - one_hop_uplink(n, p)) <= 1e-9);
  }
}

TEST_CASE("collapse: adaptive with constant rates gives the fixed value") {
  for (int n : {2, 5, 30}) {
    std::vector<double> p2(n + 1, 0.07);
    CHECK(two_hop_adaptive_downlink(n, 0.3, p2) == doctest::Approx(two_hop_fixed_downlink(n, 0.3, 0.07)).epsilon(1e-12));
  }
  auto f = star(3, Protocol::fixed_3hop, 0.0);
  auto a = f;
  a.protocol = Protocol::adaptive_3hop;
  a.scheduling_overhead = a.ack_bit = false;
  // Equal per-a rates: fixed payload everywhere.
  auto rf = phase_rates(f);
  CHECK(three_hop_downlink(3, link_failure(rf.d1, f.channel),
                           std::vector<double>(4, link_failure(rf.d2[0], f.channel)),
                           std::vector<double>(4, link_failure(rf.d3[0], f.channel))) ==
        doctest::Approx(star_downlink_failure(f, rf)).epsilon(1e-12));
}

TEST_CASE("dead and perfect networks") {
  std::vector<double> ones(5, 1.0), zeros(5, 0.0);
  CHECK(one_hop_downlink(4, 1.0) == 1.0);
  CHECK(two_hop_adaptive_downlink(4, 1.0, ones) == 1.0);
  CHECK(three_hop_downlink(4, 1.0, ones, ones) == 1.0);
  CHECK(three_hop_downlink(4, 0.0, zeros, zeros) == 0.0);
  CHECK(one_hop_uplink(4, 0.0) == 0.0);
}

TEST_CASE("failure falls with SNR") {
  for (Protocol p : {Protocol::fixed_2hop, Protocol::adaptive_3hop}) {
    double prev = 1.0;
    for (double db = -10; db <= 20; db += 2) {
      auto c = star(10, p, db);
      double v = star_cycle_failure(c).p_cycle_bound;
      CHECK(v <= prev * (1 + 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("cycle bound adds the three parts") {
  auto c = make_star(6, Protocol::adaptive_3hop, 3.0);
  c.phases.scheduling = 0.1;
  c.phases.downlink_budget_s = c.phases.uplink_budget_s = 0;
  apply_default_budgets(c);
  auto b = star_cycle_failure(c);
  CHECK(b.p_scheduling > 0);
  CHECK(b.p_cycle_bound == doctest::Approx(std::min(1.0, b.p_downlink + b.p_uplink + b.p_scheduling)));
  c.ideal_scheduling = true;
  CHECK(star_cycle_failure(c).p_scheduling == 0.0);
  auto f = make_star(6, Protocol::fixed_3hop, 3.0);
  CHECK(star_cycle_failure(f).p_scheduling == 0.0);
}

TEST_CASE("ACK dissemination uses the uniform-rate union bound over all radios") {
  auto c = make_star(5, Protocol::adaptive_2hop, 4.0);
  c.phases.scheduling = 0.2;
  c.phases.downlink_budget_s = c.phases.uplink_budget_s = 0;
  apply_default_budgets(c);
  auto r = phase_rates(c);
  double p = oracle::outage(r.s, c.channel.snr_linear, c.channel.bandwidth_hz);
  // 6 radios each send one ACK packet to the 5 others over 4 candidate relays.
  double pair = p * std::pow(p * (2 - p), 4);
  CHECK(ack_dissemination_failure(c, r) == doctest::Approx(std::min(1.0, 30 * pair)).epsilon(1e-10));
  c.protocol = Protocol::adaptive_3hop;
  c.phases.downlink = c.phases.uplink = even_split(3);
  r = phase_rates(c);
  CHECK(r.ack_rounds == 3);
  p = oracle::outage(r.s, c.channel.snr_linear, c.channel.bandwidth_hz);
  CHECK(ack_dissemination_failure(c, r) ==
        doctest::Approx(std::min(1.0, 30 * oracle::brute_pair(p, 4, 3))).epsilon(1e-10));
}

TEST_CASE("strict cycle analysis rejects a used phase without time") {
  auto c = make_star(4, Protocol::fixed_2hop);
  c.phases.downlink = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(star_cycle_failure(c), ZeroPhaseTime);
  CHECK(star_cycle_failure(c, true).p_downlink == doctest::Approx(one_hop_downlink(4, link_failure(4 * 160 / 1e-3, c.channel))));
}
