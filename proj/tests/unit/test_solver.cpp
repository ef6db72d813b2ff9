#include <doctest.h>

#include "cfbva/errors.hpp"
#include "cfbva/solver.hpp"
#include "support.hpp"

using namespace cfbva;

namespace {

struct Job {
  DriverConfig drivers;
  SimulationGrid grid = SimulationGrid::uniform(1.0, 12, 1, 1);
  Deal deal{{{0.5, PayoffKind::fixed, 1.0, 0.0}, {1.0, PayoffKind::fixed, 100.0, 0.0}}};
  CsaTerms csa;
  LiquidityPolicy liquidity;
  CloseoutConvention closeout;
  RegressionSpec regression;

  ScenarioSet simulate(std::size_t n, std::uint64_t seed = 1) const {
    return simulate_scenarios(drivers, grid, n, seed);
  }
  PricingProblem problem(const ScenarioSet& s) const {
    return {s, deal, csa, liquidity, closeout, regression};
  }
};

}  // namespace

TEST_CASE("risk-free reduction with a stochastic short rate") {
  Job j;
  j.drivers[Driver::r] = VasicekProcess{0.4, 0.03, 0.01, 0.02};
  const auto s = j.simulate(2000);
  const auto r = backward_cfbva_price(j.problem(s));
  double oracle = 0.0;
  for (std::size_t p = 0; p < s.n_paths(); ++p)
    oracle += discount_factor(s, p, 0, 6) + 100.0 * discount_factor(s, p, 0, 12);
  oracle /= static_cast<double>(s.n_paths());
  // The pathwise sums are exact; the regressed value differs by projection noise.
  CHECK(r.pathwise_mean == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(r.value - oracle) < 3.0 * r.std_error);
  CHECK(r.decomposition[kFunding] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(r.decomposition.total()).epsilon(1e-15));
  CHECK(r.resolution_mismatches == 0);
}

TEST_CASE("deterministic perfect collateral compounds the collateral bonds") {
  Job j;
  j.drivers = test::flat({{Driver::r, 0.03}, {Driver::c_plus, 0.01}});
  j.grid = SimulationGrid::uniform(1.0, 4, 1, 1);
  j.deal = Deal{{{1.0, PayoffKind::fixed, 1.0, 0.0}}};
  j.csa.alpha = 1.0;
  j.csa.rehypothecation = true;
  j.csa.accrual_plus = j.csa.accrual_minus = RateSource::of(Driver::c_plus);
  j.closeout.investor = CloseoutKind::collateral_value;
  j.liquidity.borrow = j.liquidity.lend = RateSource::risk_free(0.02);
  const auto s = j.simulate(50);
  const auto r = backward_cfbva_price(j.problem(s));
  CHECK(r.value == doctest::Approx(std::pow(1.0 + 0.25 * 0.01, -4.0)).epsilon(1e-13));
  CHECK(r.decomposition[kFunding] == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
}

TEST_CASE("payoff telescopes over funding intervals") {
  Job j;
  j.drivers[Driver::r] = VasicekProcess{0.4, 0.03, 0.01, 0.02};
  j.drivers[Driver::lambda_C] = DeterministicProcess{Curve(0.3)};
  j.drivers[Driver::lambda_I] = DeterministicProcess{Curve(0.2)};
  j.grid = SimulationGrid::uniform(1.0, 12, 2, 3);
  j.csa.alpha = 0.7;
  j.csa.threshold = 1.0;
  j.csa.rehypothecation = true;
  j.csa.recovery = {0.3, 0.4, 0.6, 0.7};
  const auto s = j.simulate(500);
  const PricingContext ctx(j.problem(s));
  const auto& J = s.grid().funding;
  for (std::size_t p = 0; p < s.n_paths(); ++p) {
    IntervalPayoff sum;
    for (std::size_t i = 0; i + 1 < J.size(); ++i) {
      const auto part = ctx.interval_payoff(p, J[i], J[i + 1]);
      for (std::size_t c = 0; c < kComponentCount; ++c)
        sum.parts[c] += discount_factor(s, p, 0, J[i]) * part.parts[c];
    }
    const auto whole = ctx.total_payoff(p);
    for (std::size_t c = 0; c < kComponentCount; ++c)
      REQUIRE(sum.parts[c] == doctest::Approx(whole.parts[c]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("forward compounding matches the backward recursion for deterministic drivers") {
  Job j;
  j.drivers = test::flat({{Driver::r, 0.02},
                          {Driver::f_plus, 0.035},
                          {Driver::lambda_C, 0.2},
                          {Driver::lambda_I, 0.1}});
  j.grid = SimulationGrid::uniform(2.0, 24, 1, 2);
  j.deal = Deal{{{1.0, PayoffKind::fixed, 10.0, 0.0}, {2.0, PayoffKind::fixed, -4.0, 0.0}}};
  j.liquidity.borrow = j.liquidity.lend = RateSource::of(Driver::f_plus);
  for (double alpha : {0.0, 0.5}) {
    for (bool rehyp : {false, true}) {
      j.csa.alpha = alpha;
      j.csa.rehypothecation = rehyp;
      const auto s = j.simulate(3000, 5);
      const PricingContext ctx(j.problem(s));
      const auto backward = backward_cfbva_run(ctx).result;
      const auto forward = forward_pathwise_oracle(ctx);
      CHECK(backward.value == doctest::Approx(forward.value).epsilon(1e-12));
      CHECK(backward.investor_defaults + backward.counterparty_defaults > 0);

      // Explicit hedge positions go through the same balance in both directions.
      std::vector<double> hedge(s.grid().funding.size() * s.n_paths(), 0.0);
      for (std::size_t i = 0; i < hedge.size(); ++i) hedge[i] = 0.5 + 0.001 * (i % 7);
      PricingOptions o;
      o.hedge = &hedge;
      CHECK(backward_cfbva_run(ctx, o).result.value ==
            doctest::Approx(forward_pathwise_oracle(ctx, o).value).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward oracle refuses asymmetric funding") {
  Job j;
  j.liquidity.borrow = RateSource::risk_free(0.01);
  const auto s = j.simulate(10);
  const PricingContext ctx(j.problem(s));
  CHECK_THROWS_AS(forward_pathwise_oracle(ctx), UsageError);
}

TEST_CASE("run artifacts") {
  Job j;
  j.drivers = test::flat({{Driver::r, 0.02}, {Driver::lambda_C, 0.5}});
  j.csa.alpha = 0.5;
  const auto s = j.simulate(400);
  PricingOptions o;
  o.keep_funding_ledger = true;
  o.keep_outcomes = true;
  o.threads = 3;
  const PricingContext ctx(j.problem(s), o);
  const auto run = backward_cfbva_run(ctx, o);
  REQUIRE(run.artifacts.funding);
  CHECK(run.artifacts.funding->dates == s.grid().funding);
  CHECK(run.artifacts.outcomes.size() == run.result.counterparty_defaults);
  for (const auto& out : run.artifacts.outcomes) {
    CHECK(out.defaulter == Defaulter::counterparty);
    CHECK(out.theta.cva <= 0.0);
  }
  CHECK(run.result.decomposition[kCva] < 0.0);
  const auto single = backward_cfbva_run(ctx, PricingOptions{}).result;
  CHECK(single.value == run.result.value);
}
