#include <doctest.h>

#include <random>

#include "cfbva/closeout.hpp"
#include "cfbva/errors.hpp"

using namespace cfbva;

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }
double neg(double x) { return x < 0.0 ? x : 0.0; }

// Settlement flow by case, written out from the default cash-flow analysis.
// Zero exposure or collateral is assigned to the non-negative branch.
double eight_cases(double eps, double col, const Recoveries& r, Defaulter d) {
  const double x = eps - col;
  if (d == Defaulter::counterparty) {
    if (eps < 0 && col >= 0) return x;
    if (eps < 0 && col < 0) return neg(x) + r.counterparty_collateral * pos(x);
    if (eps >= 0 && col >= 0) return neg(x) + r.counterparty * pos(x);
    return r.counterparty * eps - r.counterparty_collateral * col;
  }
  if (eps >= 0 && col < 0) return x;
  if (eps >= 0 && col >= 0) return pos(x) + r.investor_collateral * neg(x);
  if (eps < 0 && col < 0) return pos(x) + r.investor * neg(x);
  return r.investor * eps - r.investor_collateral * col;
}

}  // namespace

TEST_CASE("theta examples") {
  Recoveries r{0.3, 0.4, 0.8, 0.5};
  const auto a = on_default_theta(10.0, 4.0, r, Defaulter::counterparty);
  CHECK(a.cva == doctest::Approx(-0.6 * 6.0));
  CHECK(a.theta == doctest::Approx(6.4));
  const auto b = on_default_theta(-10.0, -4.0, r, Defaulter::investor);
  CHECK(b.dva == doctest::Approx(0.7 * 6.0));
  CHECK(b.theta == doctest::Approx(-5.8));
  // Rehypothecated excess collateral recovered at R'_C.
  const auto c = on_default_theta(-3.0, -10.0, r, Defaulter::counterparty);
  CHECK(c.rehypothecation == doctest::Approx(-3.5));
  CHECK(c.theta == doctest::Approx(-6.5));
  CHECK_THROWS_AS(on_default_theta(1.0, 1.0, r, Defaulter::none), UsageError);
}

TEST_CASE("case analysis plus collateral equals theta") {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> v(-10.0, 10.0), u(0.0, 1.0);
  std::bernoulli_distribution zero(0.05);
  for (int i = 0; i < 10000; ++i) {
    Recoveries r;
    r.investor = u(gen);
    r.counterparty = u(gen);
    r.investor_collateral = r.investor + (1 - r.investor) * u(gen);
    r.counterparty_collateral = r.counterparty + (1 - r.counterparty) * u(gen);
    const double eps = zero(gen) ? 0.0 : v(gen);
    const double col = zero(gen) ? 0.0 : v(gen);
    for (Defaulter d : {Defaulter::counterparty, Defaulter::investor}) {
      const auto th = on_default_theta(eps, col, r, d);
      REQUIRE(std::abs(eight_cases(eps, col, r, d) + col - th.theta) <= 1e-12);
      REQUIRE(std::abs(on_default_settlement(eps, col, r, d) + col - th.theta) <= 1e-12);
      REQUIRE(th.theta == doctest::Approx(th.closeout + th.cva + th.dva + th.rehypothecation));
    }
  }
}

TEST_CASE("close-out conventions") {
  CloseoutConvention c{CloseoutKind::risk_free, CloseoutKind::collateral_value, false};
  CHECK(c.kind_for(Defaulter::counterparty) == CloseoutKind::risk_free);
  CHECK(c.kind_for(Defaulter::investor) == CloseoutKind::collateral_value);
  CHECK(c.uses(CloseoutKind::collateral_value));
  CsaTerms uncollateralized;
  CHECK_THROWS_AS(c.validate(uncollateralized), ConfigError);
  ContinuationValues values;
  values.risk_free = std::vector<double>{1.0, 2.0};
  CHECK_THROWS_AS(closeout_amount(c, values, 0), ConfigError);
  values.collateral_value = std::vector<double>{3.0, 4.0};
  const auto amounts = closeout_amount(c, values, 1);
  CHECK(amounts.investor == 2.0);
  CHECK(amounts.counterparty == 4.0);
  c.symmetric = true;
  CHECK(closeout_amount(c, values, 1).counterparty == 2.0);
}
