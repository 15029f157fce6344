#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "occow/scenario.hpp"
#include "oracle.hpp"

using namespace occow;

namespace {

bool has(const std::vector<ConfigViolation>& v, ConfigErrorKind k, const std::string& field) {
  return std::any_of(v.begin(), v.end(), [&](const ConfigViolation& x) { return x.kind == k && x.field == field; });
}

}  // namespace

TEST_CASE("star defaults validate") {
  for (Protocol p : {Protocol::one_hop, Protocol::fixed_2hop, Protocol::adaptive_2hop, Protocol::fixed_3hop}) {
    auto c = make_star(30, p);
    CHECK(check(c).empty());
  }
  auto c = make_star(30, Protocol::adaptive_3hop);
  CHECK(c.topology.n_streams == 60);
  CHECK(c.phases.downlink_budget_s == doctest::Approx(1e-3));
  CHECK(c.phases.uplink_budget_s == doctest::Approx(1e-3));
  CHECK(check(c).empty());
}

TEST_CASE("protocol names round-trip") {
  for (Protocol p : {Protocol::one_hop, Protocol::fixed_2hop, Protocol::adaptive_2hop, Protocol::fixed_3hop,
                     Protocol::adaptive_3hop, Protocol::nonsim_relay, Protocol::freq_hop, Protocol::duty_cycled})
    CHECK(parse_protocol(to_string(p)) == p);
  CHECK_FALSE(parse_protocol("four_hop").has_value());
  CHECK(hop_count(Protocol::adaptive_3hop) == 3);
  CHECK(hop_count(Protocol::freq_hop) == 0);
}

TEST_CASE("star stream count must be 2n") {
  auto c = make_star(10, Protocol::fixed_2hop);
  c.topology.n_streams = 19;
  CHECK(has(check(c), ConfigErrorKind::InvalidTopology, "n_streams"));
}

TEST_CASE("non-positive fields are named") {
  auto c = make_star(10, Protocol::fixed_2hop);
  c.message_bits = 0;
  c.cycle_time_s = -1;
  auto v = check(c);
  CHECK(has(v, ConfigErrorKind::NonPositiveField, "message_bits"));
  CHECK(has(v, ConfigErrorKind::NonPositiveField, "cycle_time_s"));
}

TEST_CASE("fractions must sum to one") {
  auto c = make_star(10, Protocol::fixed_3hop);
  c.phases.downlink = {0.5, 0.3, 0.3};
  CHECK(has(check(c), ConfigErrorKind::FractionSumMismatch, "f_D1+f_D2+f_D3"));
  c.phases.downlink = {0.5, 0.25, 0.25 + 5e-10};
  CHECK(check(c).empty());
}

TEST_CASE("two-hop plans leave phase three empty") {
  auto c = make_star(10, Protocol::fixed_2hop);
  c.phases.uplink = {0.5, 0.3, 0.2};
  CHECK_FALSE(check(c).empty());
}

TEST_CASE("protocol knobs present exactly when required") {
  auto c = make_star(10, Protocol::fixed_2hop);
  c.protocol = Protocol::nonsim_relay;
  c.phases.downlink = c.phases.uplink = even_split(1);
  c.knobs.hops = 2;
  CHECK(has(check(c), ConfigErrorKind::MissingProtocolKnob, "relays"));
  c.knobs.relays = 3;
  CHECK(check(c).empty());
  c.knobs.duty_pct = 50;
  CHECK(has(check(c), ConfigErrorKind::UnexpectedProtocolKnob, "duty_pct"));
}

TEST_CASE("generic topology bounds the destination count") {
  auto c = make_star(10, Protocol::fixed_2hop);
  c.topology = TopologySpec{TopologyKind::generic, 10, 20, 10};
  CHECK(has(check(c), ConfigErrorKind::InvalidTopology, "avg_subscribers"));
  c.topology.avg_subscribers = 9;
  CHECK(check(c).empty());
}

TEST_CASE("validate reports every violation at once") {
  auto c = make_star(10, Protocol::fixed_2hop);
  c.message_bits = 0;
  c.phases.downlink = {0.9, 0.9, 0};
  try {
    validate(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.violations().size() >= 2);
  }
  auto ok = make_star(4, Protocol::fixed_2hop);
  CHECK(&validate(ok) == &ok);
}

TEST_CASE("phase rates follow the timing rules") {
  for (Protocol p : {Protocol::fixed_2hop, Protocol::adaptive_2hop, Protocol::fixed_3hop, Protocol::adaptive_3hop})
    for (bool flags : {true, false}) {
      auto c = make_star(7, p, 10, 160, 2e-3);
      c.phases.downlink = hop_count(p) == 3 ? std::array<double, 3>{0.5, 0.2, 0.3} : std::array<double, 3>{0.6, 0.4, 0};
      c.phases.uplink = hop_count(p) == 3 ? std::array<double, 3>{0.2, 0.3, 0.5} : std::array<double, 3>{0.3, 0.7, 0};
      c.scheduling_overhead = c.ack_bit = flags;
      c.ideal_scheduling = true;
      auto r = phase_rates(c);
      auto o = oracle::star_rates(c);
      CHECK(r.d1 == doctest::Approx(o.down.r1).epsilon(1e-14));
      CHECK(r.u1 == doctest::Approx(o.up.r1).epsilon(1e-14));
      for (int a = 0; a <= 7; ++a) {
        CHECK(r.d2[a] == doctest::Approx(o.down.r2[a]).epsilon(1e-14));
        CHECK(r.u2[a] == doctest::Approx(o.up.r2[a]).epsilon(1e-14));
        if (hop_count(p) == 3) {
          CHECK(r.d3[a] == doctest::Approx(o.down.r3[a]).epsilon(1e-14));
          CHECK(r.u3[a] == doctest::Approx(o.up.r3[a]).epsilon(1e-14));
        }
      }
    }
}

TEST_CASE("phase rates for the 30-node star") {
  auto c = make_star(30, Protocol::fixed_2hop);
  auto r = phase_rates(c);
  // 30 messages of 160 bits in half of the 1 ms downlink budget.
  CHECK(r.d1 == doctest::Approx(9.6e6));
  CHECK(r.d2[0] == doctest::Approx(9.6e6));
  CHECK(r.u1 == doctest::Approx(9.6e6));
}

TEST_CASE("adaptive overheads can be switched off") {
  auto c = make_star(30, Protocol::adaptive_2hop);
  c.ideal_scheduling = true;
  auto on = phase_rates(c);
  c.scheduling_overhead = c.ack_bit = false;
  auto off = phase_rates(c);
  CHECK(on.u1 == doctest::Approx(161.0 * 30 / 0.5e-3));
  CHECK(off.u1 == doctest::Approx(160.0 * 30 / 0.5e-3));
  CHECK(on.d2[10] == doctest::Approx((160.0 * 20 + 60) / 0.5e-3));
  CHECK(off.d2[10] == doctest::Approx(160.0 * 20 / 0.5e-3));
}

TEST_CASE("scheduling phase rate and rounds") {
  auto c = make_star(10, Protocol::adaptive_3hop);
  c.phases.scheduling = 0.1;
  c.phases.downlink_budget_s = c.phases.uplink_budget_s = 0;
  apply_default_budgets(c);
  auto r = phase_rates(c);
  CHECK(r.ack_rounds == 3);
  CHECK(r.s == doctest::Approx(3.0 * 2 * 10 * 11 / (0.1 * 2e-3)));
  c.three_hop_acks = false;
  CHECK(phase_rates(c).ack_rounds == 2);
  c.ideal_scheduling = true;
  CHECK(phase_rates(c).ack_rounds == 0);
}

TEST_CASE("a used phase without time is rejected unless dead phases are allowed") {
  auto c = make_star(5, Protocol::adaptive_2hop);
  c.ideal_scheduling = true;
  c.phases.downlink = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(phase_rates(c), ZeroPhaseTime);
  try {
    phase_rates(c);
  } catch (const ZeroPhaseTime& e) {
    CHECK(e.field() == "f_D2");
  }
  auto r = phase_rates(c, true);
  CHECK(std::isinf(r.d2[0]));
  auto s = make_star(5, Protocol::adaptive_2hop);
  CHECK_THROWS_AS(phase_rates(s), ZeroPhaseTime);
}

TEST_CASE("failure probability carries its log") {
  auto f = FailureProbability::analytic(1e-200);
  CHECK(std::exp(f.log_p) == doctest::Approx(1e-200).epsilon(1e-12));
  auto m = FailureProbability::monte_carlo(0.01, 0.001);
  CHECK(m.source == Source::monte_carlo);
  CHECK(m.ci_halfwidth == 0.001);
  CHECK(FailureProbability::analytic(0).log_p == -std::numeric_limits<double>::infinity());
}
