#include <doctest.h>

#include "cfbva/curve.hpp"
#include "cfbva/errors.hpp"

using namespace cfbva;

TEST_CASE("flat curve") {
  const Curve c(0.03);
  CHECK(c(10.0) == 0.03);
  CHECK(c.integral(0.5, 2.0) == doctest::Approx(0.045).epsilon(1e-15));
  CHECK(c.is_flat());
}

TEST_CASE("piecewise-linear curve integrates exactly") {
  const Curve c({0.0, 1.0, 2.0}, {0.0, 1.0, 3.0});
  CHECK(c(0.5) == doctest::Approx(0.5));
  CHECK(c(1.5) == doctest::Approx(2.0));
  // Triangle plus trapezoid.
  CHECK(c.integral(0.0, 2.0) == doctest::Approx(2.5).epsilon(1e-15));
  // int_{0.5}^{1} t dt + int_1^{1.5} (2t - 1) dt
  CHECK(c.integral(0.5, 1.5) == doctest::Approx(0.375 + 0.75).epsilon(1e-15));
  // Flat extrapolation on both sides.
  CHECK(c(-1.0) == 0.0);
  CHECK(c(5.0) == 3.0);
  CHECK(c.integral(2.0, 4.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(c.integral(1.5, 0.5) == doctest::Approx(-1.125).epsilon(1e-15));
  CHECK_FALSE(c.is_flat());
}

TEST_CASE("curve rejects malformed knots") {
  CHECK_THROWS(Curve({0.0, 0.0}, {1.0, 2.0}));
  CHECK_THROWS(Curve({0.0, 1.0}, {1.0}));
  CHECK_THROWS(Curve(std::vector<double>{}, std::vector<double>{}));
}
