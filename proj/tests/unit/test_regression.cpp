#include <doctest.h>

#include <random>

#include "cfbva/errors.hpp"
#include "cfbva/regression.hpp"

using namespace cfbva;

namespace {

std::vector<std::uint32_t> everyone(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  return p;
}

}  // namespace

TEST_CASE("basis size") {
  CHECK(polynomial_basis_size(0, 3) == 1);
  CHECK(polynomial_basis_size(1, 2) == 3);
  CHECK(polynomial_basis_size(2, 2) == 6);
  CHECK(polynomial_basis_size(3, 3) == 20);
}

TEST_CASE("polynomials in the span are reproduced") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = 1000;
  std::vector<double> x(n), y(n), target(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 100.0 + 10.0 * z(gen);
    y[i] = 0.02 + 0.01 * z(gen);
    target[i] = 1.0 + 2.0 * x[i] + 3.0 * x[i] * y[i] - 50.0 * y[i] * y[i];
  }
  const auto pop = everyone(n);
  RegressionDiagnostics d;
  const auto fit =
      regress_conditional_expectation({x, y}, pop, target, RegressionSpec{{}, 2, 10}, &d);
  for (std::size_t i = 0; i < n; ++i) REQUIRE(fit[i] == doctest::Approx(target[i]).epsilon(1e-9));
  CHECK(d.basis_size == 6);
  CHECK(d.residual_rms < 1e-8);
  CHECK_FALSE(d.degree_fallback);
}

TEST_CASE("constant state reduces to the mean over the population") {
  const std::vector<double> x(10, 3.0);
  std::vector<double> target{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<std::uint32_t> pop{1, 3, 5};
  const auto fit = regress_conditional_expectation({x}, pop, target, RegressionSpec{});
  CHECK(fit[1] == doctest::Approx(4.0));
  CHECK(fit[5] == doctest::Approx(4.0));
  CHECK(fit[0] == 1.0);  // outside the population
}

TEST_CASE("small populations step the degree down") {
  std::vector<double> x(20), target(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x[i] = static_cast<double>(i);
    target[i] = 2.0 * x[i];
  }
  const LeastSquares ls({x}, everyone(20), 2, 10);
  CHECK(ls.diagnostics().degree == 1);
  CHECK(ls.diagnostics().degree_fallback);
  ls.project(target);
  CHECK(target[7] == doctest::Approx(14.0));
  CHECK_THROWS_AS(LeastSquares({x}, std::span<const std::uint32_t>{}, 2, 10), SolverError);
}

TEST_CASE("collinear state falls back to the ridge solve") {
  std::vector<double> x(200), y(200), target(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x[i] = std::sin(static_cast<double>(i));
    y[i] = 2.0 * x[i] + 1.0;
    target[i] = x[i];
  }
  const LeastSquares ls({x, y}, everyone(200), 1, 10);
  CHECK(ls.diagnostics().ridge);
  ls.project(target);
  for (std::size_t i = 0; i < 200; ++i)
    REQUIRE(target[i] == doctest::Approx(std::sin(static_cast<double>(i))).epsilon(1e-6));
}
