#include <doctest.h>

#include <filesystem>

#include "cfbva/errors.hpp"
#include "cfbva/market.hpp"
#include "support.hpp"

using namespace cfbva;

TEST_CASE("uniform grid keeps the last index in every subset") {
  const auto g = SimulationGrid::uniform(1.0, 10, 3, 4);
  CHECK(g.times.size() == 11);
  CHECK(g.times.back() == 1.0);
  CHECK(g.margining == std::vector<std::size_t>{0, 3, 6, 9, 10});
  CHECK(g.funding == std::vector<std::size_t>{0, 4, 8, 10});
  CHECK(g.index_of(0.3) == 3);
  CHECK(g.bracket(0.35) == 3);
  CHECK_THROWS_AS(g.index_of(0.35), ConfigError);
}

TEST_CASE("first crossing interpolates the cumulative linearly") {
  const std::vector<double> t{0.0, 1.0, 2.0}, cum{0.0, 1.0, 3.0};
  CHECK(first_crossing(t, cum, 0.5) == doctest::Approx(0.5));
  CHECK(first_crossing(t, cum, 2.0) == doctest::Approx(1.5));
  CHECK(std::isinf(first_crossing(t, cum, 4.0)));
}

TEST_CASE("independent default times invert the exponential thresholds") {
  const std::vector<double> t{0.0, 100.0};
  const std::vector<double> li(2, 1.0), lc(2, 2.0);
  const double u1 = 0.3, u2 = 0.6;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double z1 = radius * std::cos(2.0 * M_PI * u2), z2 = radius * std::sin(2.0 * M_PI * u2);
  // E = -log(1 - Phi(z)) = -log(Phi(-z))
  auto threshold = [](double z) { return -std::log(0.5 * std::erfc(z / std::sqrt(2.0))); };
  const auto d = sample_default_times(t, li, lc, 0.0, u1, u2);
  CHECK(d.investor == doctest::Approx(threshold(z1) / 1.0).epsilon(1e-12));
  CHECK(d.counterparty == doctest::Approx(threshold(z2) / 2.0).epsilon(1e-12));
  const auto same = sample_default_times(t, li, li, 1.0, u1, u2);
  CHECK(same.investor == doctest::Approx(same.counterparty).epsilon(1e-14));
}

TEST_CASE("deterministic drivers discount exactly") {
  DriverConfig c;
  c[Driver::r] = DeterministicProcess{Curve({0.0, 1.0}, {0.01, 0.03})};
  const auto g = SimulationGrid::uniform(2.0, 8, 1, 1);
  const auto s = simulate_scenarios(c, g, 3, 1);
  // Knots on the grid: the trapezoid is exact. int_0^2 = 0.02 + 0.03.
  CHECK(discount_factor(s, 2, 0, 8) == doctest::Approx(std::exp(-0.05)).epsilon(1e-14));
  CHECK(zero_coupon_bond(s, Driver::r, 0, 0.5, 2.0) ==
        doctest::Approx(std::exp(-(0.5 * 0.5 * (0.02 + 0.03) + 0.03))).epsilon(1e-14));
  CHECK_FALSE(s.stochastic(Driver::r));
  CHECK(std::isinf(s.tau(0)));
}

TEST_CASE("vasicek transition moments and bond price") {
  DriverConfig c;
  const VasicekProcess v{0.5, 0.04, 0.01, 0.02};
  c[Driver::r] = v;
  const double T = 2.0;
  const auto g = SimulationGrid::uniform(T, 104, 1, 1);
  const std::size_t n = 40000;
  const auto s = simulate_scenarios(c, g, n, 11, 2);
  std::vector<double> rT, disc;
  for (std::size_t p = 0; p < n; ++p) {
    rT.push_back(s.value(Driver::r, p, 104));
    disc.push_back(discount_factor(s, p, 0, 104));
  }
  const auto m = test::stats(rT);
  const double mean = v.long_run + (v.initial - v.long_run) * std::exp(-v.mean_reversion * T);
  const double var = v.volatility * v.volatility * (1 - std::exp(-2 * v.mean_reversion * T)) /
                     (2 * v.mean_reversion);
  CHECK(std::abs(m.mean - mean) < 4 * m.se);
  double ss = 0.0;
  for (double x : rT) ss += (x - m.mean) * (x - m.mean);
  CHECK(ss / (n - 1) == doctest::Approx(var).epsilon(0.05));
  const auto d = test::stats(disc);
  CHECK(std::abs(d.mean - vasicek_bond(v, v.initial, T)) < 4 * d.se + 1e-6);

  // Without volatility the bond is the exponential of the ODE integral.
  const VasicekProcess still{0.5, 0.04, 0.0, 0.02};
  const double B = (1 - std::exp(-0.5 * T)) / 0.5;
  CHECK(vasicek_bond(still, 0.02, T) ==
        doctest::Approx(std::exp(-(0.04 * T + (0.02 - 0.04) * B))).epsilon(1e-14));
}

TEST_CASE("gbm martingale under the risk-free drift") {
  DriverConfig c = test::flat({{Driver::r, 0.03}});
  c[Driver::underlying] = GeometricBrownianProcess{DriftMode::risk_free, RateSide::plus, 0.3, 100.0,
                                                   0.01, std::nullopt};
  const auto g = SimulationGrid::uniform(1.0, 12, 1, 1);
  const std::size_t n = 50000;
  const auto s = simulate_scenarios(c, g, n, 5);
  std::vector<double> st;
  for (std::size_t p = 0; p < n; ++p) st.push_back(s.value(Driver::underlying, p, 12));
  const auto m = test::stats(st);
  CHECK(std::abs(m.mean - 100.0 * std::exp(0.02)) < 4 * m.se);
}

TEST_CASE("default frequencies match the intensities") {
  DriverConfig c = test::flat({{Driver::lambda_C, 0.1}, {Driver::lambda_I, 0.05}});
  const auto g = SimulationGrid::uniform(1.0, 12, 1, 1);
  const std::size_t n = 100000;
  const auto s = simulate_scenarios(c, g, n, 9);
  std::size_t c_first = 0;
  for (std::size_t p = 0; p < n; ++p)
    if (s.tau(p) <= 1.0 && s.defaulter(p) == Defaulter::counterparty) ++c_first;
  const double p_hat = static_cast<double>(c_first) / n;
  const double p = 0.1 / 0.15 * (1 - std::exp(-0.15));
  CHECK(std::abs(p_hat - p) < 4 * std::sqrt(p * (1 - p) / n));
  const double lambda_hat = first_to_default_intensity(s, Defaulter::counterparty, 1.0);
  CHECK(std::abs(lambda_hat - 0.1) < 4 * 0.1 / std::sqrt(static_cast<double>(c_first)));
}

TEST_CASE("correlated drivers") {
  DriverConfig c;
  c[Driver::r] = VasicekProcess{1.0, 0.02, 0.01, 0.02};
  c[Driver::r_foreign] = VasicekProcess{0.5, 0.01, 0.02, 0.01};
  c.correlated = {Driver::r, Driver::r_foreign};
  c.correlation = {1.0, 0.6, 0.6, 1.0};
  c.validate();
  const std::size_t n = 50000;
  const auto s = simulate_scenarios(c, SimulationGrid::uniform(1.0, 12, 1, 1), n, 3);
  std::vector<double> a, b;
  for (std::size_t p = 0; p < n; ++p) {
    a.push_back(s.value(Driver::r, p, 1));
    b.push_back(s.value(Driver::r_foreign, p, 1));
  }
  const auto ma = test::stats(a), mb = test::stats(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    sab += (a[p] - ma.mean) * (b[p] - mb.mean);
    saa += (a[p] - ma.mean) * (a[p] - ma.mean);
    sbb += (b[p] - mb.mean) * (b[p] - mb.mean);
  }
  const double rho = sab / std::sqrt(saa * sbb);
  CHECK(std::abs(rho - 0.6) < 4 * (1 - 0.36) / std::sqrt(static_cast<double>(n)));

  DriverConfig bad = c;
  bad.correlation = {1.0, 1.2, 1.2, 1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.correlation = {1.0, 0.6, 0.5, 1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("negative intensities are floored and counted") {
  DriverConfig c;
  c[Driver::lambda_C] = VasicekProcess{1.0, 0.001, 0.05, 0.001};
  const auto s = simulate_scenarios(c, SimulationGrid::uniform(1.0, 12, 1, 1), 5000, 3);
  CHECK(s.diagnostics().floored[index(Driver::lambda_C)] > 0);
  for (std::size_t k = 0; k < s.n_times(); ++k)
    for (double x : s.column(Driver::lambda_C, k)) REQUIRE(x >= 0.0);
}

TEST_CASE("scenario dump round trip and thread independence") {
  DriverConfig c;
  c[Driver::r] = VasicekProcess{0.3, 0.03, 0.01, 0.02};
  c[Driver::lambda_C] = DeterministicProcess{Curve(0.3)};
  const auto g = SimulationGrid::uniform(1.0, 6, 2, 3);
  const auto s1 = simulate_scenarios(c, g, 257, 77, 1);
  const auto s4 = simulate_scenarios(c, g, 257, 77, 4);
  for (std::size_t p = 0; p < 257; ++p) {
    REQUIRE(s1.tau_counterparty(p) == s4.tau_counterparty(p));
    for (std::size_t k = 0; k < 7; ++k) REQUIRE(s1.value(Driver::r, p, k) == s4.value(Driver::r, p, k));
  }
  const auto file = std::filesystem::temp_directory_path() / "cfbva_roundtrip.bin";
  write_scenarios(s1, file);
  const auto back = read_scenarios(file, c, g);
  std::filesystem::remove(file);
  CHECK(back.n_paths() == 257);
  CHECK(back.seed() == 77);
  for (std::size_t p = 0; p < 257; ++p) {
    REQUIRE(back.tau_counterparty(p) == s1.tau_counterparty(p));
    REQUIRE(back.tau_investor(p) == s1.tau_investor(p));
    for (std::size_t k = 0; k < 7; ++k) {
      REQUIRE(back.value(Driver::r, p, k) == s1.value(Driver::r, p, k));
      REQUIRE(back.cumulative(Driver::r, p, k) == s1.cumulative(Driver::r, p, k));
    }
  }
}

TEST_CASE("default time overrides reject ties") {
  auto s = simulate_scenarios(DriverConfig{}, SimulationGrid::uniform(1.0, 4, 1, 1), 2, 1);
  s.set_default_times(0, 0.5, 0.7);
  CHECK(s.defaulter(0) == Defaulter::investor);
  CHECK(s.tau(0) == 0.5);
  CHECK_THROWS(s.set_default_times(1, 0.5, 0.5));
  CHECK_THROWS(s.set_default_times(1, -0.1, 0.5));
}
