#include <doctest.h>

#include "cfbva/deal.hpp"
#include "cfbva/errors.hpp"
#include "support.hpp"

using namespace cfbva;

TEST_CASE("payoff menu") {
  CHECK(payoff({1.0, PayoffKind::fixed, 5.0, 0.0}, 123.0) == 5.0);
  CHECK(payoff({1.0, PayoffKind::linear, 2.0, 100.0}, 90.0) == -20.0);
  CHECK(payoff({1.0, PayoffKind::call, 2.0, 100.0}, 90.0) == 0.0);
  CHECK(payoff({1.0, PayoffKind::call, 2.0, 100.0}, 110.0) == 20.0);
}

TEST_CASE("deal validation and scheduling") {
  Deal d;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.cashflows = {{0.5, PayoffKind::fixed, 1.0, 0.0}, {1.0, PayoffKind::linear, 1.0, 10.0},
                 {1.0, PayoffKind::fixed, 3.0, 0.0}};
  CHECK(d.uses_underlying());
  CHECK(d.maturity() == 1.0);
  DriverConfig c = test::flat({{Driver::underlying, 12.0}});
  const auto g = SimulationGrid::uniform(1.0, 4, 1, 1);
  const auto s = simulate_scenarios(c, g, 2, 1);
  const ScheduledDeal sd(d, g);
  CHECK(sd.pays_at(2));
  CHECK_FALSE(sd.pays_at(1));
  CHECK(sd.cashflow(s, 1, 2) == 1.0);
  CHECK(sd.cashflow(s, 0, 4) == doctest::Approx(2.0 + 3.0));

  Deal off{{{0.3, PayoffKind::fixed, 1.0, 0.0}}};
  CHECK_THROWS_AS(ScheduledDeal(off, g), ConfigError);
  Deal late{{{2.0, PayoffKind::fixed, 1.0, 0.0}}};
  CHECK_THROWS_AS(ScheduledDeal(late, g), ConfigError);
  Deal at_zero{{{0.0, PayoffKind::fixed, 1.0, 0.0}}};
  CHECK_THROWS_AS(at_zero.validate(), ConfigError);
}
