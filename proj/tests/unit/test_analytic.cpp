#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "cfbva/analytic.hpp"
#include "cfbva/errors.hpp"

using namespace cfbva;

namespace {

Deal bullet(double amount, double T) { return Deal{{{T, PayoffKind::fixed, amount, 0.0}}}; }

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("perfect and foreign collateral") {
  CHECK(analytic_perfect_collateral(bullet(1.0, 2.0), Curve(0.03)) ==
        doctest::Approx(std::exp(-0.06)).epsilon(1e-15));
  const Curve c({0.0, 1.0}, {0.01, 0.03});
  // c - r^e + r = 0 leaves the flows undiscounted.
  const Curve r(0.02);
  const Curve re({0.0, 1.0}, {0.03, 0.05});
  Deal two{{{0.5, PayoffKind::fixed, 1.0, 0.0}, {2.0, PayoffKind::fixed, 3.0, 0.0}}};
  CHECK(analytic_foreign_collateral(two, c, r, re) == doctest::Approx(4.0).epsilon(1e-12));
  Deal option{{{1.0, PayoffKind::call, 1.0, 100.0}}};
  CHECK_THROWS_AS(analytic_perfect_collateral(option, c), UsageError);
}

TEST_CASE("uncollateralized deal funded at f+ with counterparty risk") {
  UncollateralizedInputs in{Curve(0.03), Curve(0.03), Curve(0.02), Curve(0.0), 1.0, 1.0};
  const auto v = analytic_uncollateralized_fva(bullet(1.0, 1.0), in);
  CHECK(v.value == doctest::Approx(std::exp(-0.05)).epsilon(1e-12));
  CHECK(v.funded == doctest::Approx(std::exp(-0.03)).epsilon(1e-14));
  CHECK(v.cva == doctest::Approx(std::exp(-0.03) * (1 - std::exp(-0.02))).epsilon(1e-12));
}

TEST_CASE("uncollateralized liability with investor risk") {
  UncollateralizedInputs in{Curve(0.05), Curve(0.01), Curve(0.0), Curve(0.03), 1.0, 0.6};
  const auto v = analytic_uncollateralized_fva(bullet(-1.0, 1.0), in);
  const double dva = -0.6 * 0.03 * std::exp(-0.01) * (1 - std::exp(-0.03)) / 0.03;
  CHECK(v.dva == doctest::Approx(dva).epsilon(1e-12));
  CHECK(v.value == doctest::Approx(-std::exp(-0.01) - dva).epsilon(1e-12));
}

TEST_CASE("ccp gap terms") {
  CcpInputs in;
  in.collateral_rate = Curve(0.01);
  in.overnight = Curve(0.015);
  in.liquidity_plus = Curve(0.005);
  in.lambda_C = Curve(0.04);
  in.lambda_I = Curve(0.01);
  in.lgd_C = 0.6;
  in.jump = Curve(1.0);
  const Deal d = bullet(1.0, 3.0);
  const auto v = analytic_ccp_gap_risk(d, in);
  const double k = 0.04 + 0.01 + 0.005 + 0.015;
  const double hand = 0.6 * 1.0 * 0.04 * (1 - std::exp(-k * 3.0)) / k;
  CHECK(v.counterparty_gap == doctest::Approx(hand).epsilon(1e-10));
  CHECK(ccp_gap_closed_form(0.6, 1.0, 0.04, 0.01, 0.005, 0.015, 3.0) ==
        doctest::Approx(hand).epsilon(1e-15));
  CHECK(v.investor_gap == 0.0);
  CHECK(v.value == doctest::Approx(std::exp(-0.03) - hand).epsilon(1e-12));

  in.jump = Curve(0.0);
  CHECK(analytic_ccp_gap_risk(d, in).value ==
        doctest::Approx(analytic_perfect_collateral(d, in.collateral_rate)).epsilon(1e-12));

  // Time-varying inputs against a direct quadrature.
  in.jump = Curve({0.0, 3.0}, {1.0, -0.5});
  in.lambda_C = Curve({0.0, 1.0, 3.0}, {0.02, 0.06, 0.03});
  in.liquidity_minus = Curve(0.002);
  in.lgd_I = 0.5;
  const auto w = analytic_ccp_gap_risk(d, in);
  auto survival = [&](double u, const Curve& l) {
    return std::exp(-(in.lambda_C.integral(0, u) + in.lambda_I.integral(0, u) +
                      l.integral(0, u) + in.overnight.integral(0, u)));
  };
  const double cgap = simpson(
      [&](double u) {
        return in.lambda_C(u) * survival(u, in.liquidity_plus) * 0.6 * std::max(in.jump(u), 0.0);
      },
      0.0, 3.0);
  const double igap = simpson(
      [&](double u) {
        return in.lambda_I(u) * survival(u, in.liquidity_minus) * 0.5 * std::min(in.jump(u), 0.0);
      },
      0.0, 3.0);
  CHECK(w.counterparty_gap == doctest::Approx(cgap).epsilon(1e-6));
  CHECK(w.investor_gap == doctest::Approx(igap).epsilon(1e-6));
}
