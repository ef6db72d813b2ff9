#include <doctest.h>

#include <random>

#include "cfbva/collateral.hpp"
#include "cfbva/errors.hpp"
#include "support.hpp"

using namespace cfbva;

TEST_CASE("margin target with threshold") {
  CsaTerms csa;
  csa.alpha = 0.5;
  csa.threshold = 1.0;
  CHECK(collateral_target(3.0, csa) == 1.0);
  CHECK(collateral_target(-3.0, csa) == -1.0);
  CHECK(collateral_target(0.5, csa) == 0.0);
  CHECK(collateral_target(-1.0, csa) == 0.0);
}

TEST_CASE("accrual and carry") {
  CHECK(accrue_collateral(100.0, 0.02, 0.05, 0.0, 0.5) == doctest::Approx(101.0));
  CHECK(accrue_collateral(-100.0, 0.02, 0.05, 0.0, 0.5) == doctest::Approx(-102.5));
  CHECK(effective_collateral_rate(0.02, 0.05, 0.0) == 0.0);
  CHECK(margining_cost_term(10.0, 0.99, 0.98) == doctest::Approx(10.0 * (1 - 0.99 / 0.98)));
  CHECK_THROWS_AS(margining_cost_term(1.0, 0.99, 0.0), NumericDomainError);
}

TEST_CASE("local margin solve is a fixed point of the rule") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0), r(0.9, 1.1), a(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    CsaTerms csa;
    csa.alpha = a(gen);
    csa.threshold = std::abs(u(gen)) / 2;
    const double m = u(gen), rp = r(gen), rm = r(gen);
    const double M = solve_collateral_mtm(m, csa, rp, rm);
    const double target = collateral_target(M, csa);
    const double rho = target < 0.0 ? rm : rp;
    REQUIRE(M == doctest::Approx(m + target * (1.0 - rho)).epsilon(1e-12));
  }
}

namespace {

struct Fixture {
  Fixture() {
    drivers = test::flat({{Driver::r, 0.02}, {Driver::c_plus, 0.0}});
    grid = SimulationGrid::uniform(1.0, 4, 1, 1);
    csa.alpha = 1.0;
    csa.minimum_transfer = 0.5;
    csa.accrual_plus = csa.accrual_minus = RateSource::of(Driver::c_plus);
  }
  DriverConfig drivers;
  SimulationGrid grid;
  CsaTerms csa;
};

}  // namespace

TEST_CASE("minimum transfer keeps the previous balance") {
  Fixture f;
  const auto s = simulate_scenarios(f.drivers, f.grid, 1, 1);
  const CollateralModel model(s, f.csa);
  // Marks at t = 0, .25, .5, .75, 1.
  const auto ledger = build_collateral_ledger(model, {1.0, 1.3, 2.0, 0.2, 0.1});
  CHECK(ledger.posted(0, 0) == 1.0);
  CHECK(ledger.posted(1, 0) == 1.0);  // call of 0.3 below the MTA
  CHECK(ledger.posted(2, 0) == 2.0);
  CHECK(ledger.posted(3, 0) == 0.2);
  CHECK(ledger.posted(4, 0) == 0.2);
  CHECK_THROWS_AS(build_collateral_ledger(model, {1.0}), UsageError);
}

TEST_CASE("held collateral freezes at default") {
  Fixture f;
  auto s = simulate_scenarios(f.drivers, f.grid, 1, 1);
  s.set_default_times(0, 0.6, INFINITY);
  const CollateralModel model(s, f.csa);
  const auto ledger = build_collateral_ledger(model, {1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(ledger.held(s, 2, 0) == 3.0);
  CHECK(ledger.held(s, 3, 0) == 0.0);
  // Balance 3 posted at 0.5 at c = 0, carried back from 0.75 to 0.6 at r.
  CHECK(pre_default_collateral(model, ledger, 0) ==
        doctest::Approx(3.0 * std::exp(-0.02 * 0.15)).epsilon(1e-13));
}

TEST_CASE("collateral cash flows equal margining cost plus the pre-default balance") {
  // With deterministic rates the identity holds path by path.
  Fixture f;
  f.drivers[Driver::c_plus] = DeterministicProcess{Curve(0.035)};
  f.drivers[Driver::c_minus] = DeterministicProcess{Curve(0.01)};
  f.csa.accrual_minus = RateSource::of(Driver::c_minus);
  f.csa.minimum_transfer = 0.0;
  f.grid = SimulationGrid::uniform(2.0, 24, 2, 1);
  const std::size_t n = 200;
  auto s = simulate_scenarios(f.drivers, f.grid, n, 1);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0), tau(0.0, 3.0);
  for (std::size_t p = 0; p < n; ++p) s.set_default_times(p, tau(gen), tau(gen));
  for (double alpha : {0.0, 0.5, 1.0}) {
    f.csa.alpha = alpha;
    const CollateralModel model(s, f.csa);
    std::vector<double> marks(model.n_dates() * n);
    for (double& x : marks) x = u(gen);
    const auto ledger = build_collateral_ledger(model, marks);
    for (std::size_t p = 0; p < n; ++p) {
      const double T = f.grid.maturity();
      double rhs = margining_cost_gamma(model, ledger, p);
      if (s.tau(p) < T)
        rhs += std::exp(-0.02 * s.tau(p)) * pre_default_collateral(model, ledger, p);
      REQUIRE(gamma_cashflow_oracle(model, ledger, p) == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("csa validation names the field") {
  CsaTerms csa;
  csa.recovery.counterparty_collateral = 0.5;
  CHECK_THROWS_WITH_AS(csa.validate(), doctest::Contains("csa.R_prime_C"), ConfigError);
  csa.rehypothecation = true;
  csa.recovery.counterparty = 0.6;
  CHECK_THROWS_WITH_AS(csa.validate(), doctest::Contains("csa.R_C"), ConfigError);
  csa.recovery.counterparty = 0.4;
  CHECK_NOTHROW(csa.validate());
  csa.alpha = 1.5;
  CHECK_THROWS_WITH_AS(csa.validate(), doctest::Contains("csa.alpha"), ConfigError);
}
