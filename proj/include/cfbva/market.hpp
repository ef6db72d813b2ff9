#ifndef CFBVA_MARKET_HPP
#define CFBVA_MARKET_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "cfbva/curve.hpp"

namespace cfbva {

enum class Driver : std::uint8_t {
  r,
  c_plus,
  c_minus,
  f_plus,
  f_minus,
  h_plus,
  h_minus,
  overnight,        // e
  liquidity_plus,   // l+
  liquidity_minus,  // l-
  lambda_I,
  lambda_C,
  fx,         // domestic units per foreign unit
  r_foreign,  // r^e
  underlying  // S
};
inline constexpr std::size_t kDriverCount = 15;

std::string_view to_string(Driver d);
std::optional<Driver> parse_driver(std::string_view name);
inline std::size_t index(Driver d) { return static_cast<std::size_t>(d); }
// Everything except fx and the underlying is a rate or an intensity.
bool is_rate(Driver d);

// Master time grid with margining and funding dates as subsets (indices into times).
struct SimulationGrid {
  std::vector<double> times;
  std::vector<std::size_t> margining;
  std::vector<std::size_t> funding;

  static SimulationGrid uniform(double maturity, std::size_t steps, std::size_t margining_stride,
                                std::size_t funding_stride);
  void validate() const;
  std::size_t last() const { return times.size() - 1; }
  double maturity() const { return times.back(); }
  // Index of a grid time; throws if t is not on the grid.
  std::size_t index_of(double t) const;
  // Largest k with times[k] <= t (t >= 0).
  std::size_t bracket(double t) const;
};

struct DeterministicProcess {
  Curve curve;
};

// dx = a (b - x) dt + sigma dW, sampled with the exact transition.
struct VasicekProcess {
  double mean_reversion = 1.0;
  double long_run = 0.0;
  double volatility = 0.0;
  double initial = 0.0;
};

enum class DriftMode { risk_free, funding, hedging };
enum class RateSide { plus, minus };

// Lognormal asset. The drift rate is r, the funding rate or the hedging rate
// (side selects +/-), less a constant dividend yield or a yield driver.
struct GeometricBrownianProcess {
  DriftMode drift = DriftMode::risk_free;
  RateSide side = RateSide::plus;
  double volatility = 0.0;
  double initial = 1.0;
  double dividend_yield = 0.0;
  std::optional<Driver> yield_driver;
};

using ProcessSpec = std::variant<DeterministicProcess, VasicekProcess, GeometricBrownianProcess>;

struct DriverConfig {
  DriverConfig();

  std::array<ProcessSpec, kDriverCount> process;
  std::vector<Driver> correlated;   // order of the rows of `correlation`
  std::vector<double> correlation;  // row-major, correlated.size()^2
  double default_correlation = 0.0;

  ProcessSpec& operator[](Driver d) { return process[index(d)]; }
  const ProcessSpec& operator[](Driver d) const { return process[index(d)]; }
  bool stochastic(Driver d) const;
  void validate() const;
};

enum class Defaulter : std::uint8_t { none, investor, counterparty };

struct SimulationDiagnostics {
  std::array<std::size_t, kDriverCount> floored{};  // negative intensities set to zero
  std::size_t default_ties = 0;                     // tau_I == tau_C redraws
};

// Immutable simulated market. Stochastic drivers are stored time-major
// ([time][path]); deterministic drivers as one shared column.
class ScenarioSet {
 public:
  std::size_t n_paths() const { return n_paths_; }
  std::size_t n_times() const { return grid_.times.size(); }
  const SimulationGrid& grid() const { return grid_; }
  const DriverConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const SimulationDiagnostics& diagnostics() const { return diagnostics_; }

  bool stochastic(Driver d) const { return series_[index(d)].stochastic; }
  double value(Driver d, std::size_t path, std::size_t k) const {
    const Series& s = series_[index(d)];
    return s.stochastic ? s.data[k * n_paths_ + path] : s.data[k];
  }
  // Values of a stochastic driver across paths at time index k.
  std::span<const double> column(Driver d, std::size_t k) const;
  // Trapezoid integral of a rate driver from 0 to t_k.
  double cumulative(Driver d, std::size_t path, std::size_t k) const {
    const Series& s = series_[index(d)];
    return s.stochastic ? s.cumulative[k * n_paths_ + path] : s.cumulative[k];
  }
  double integral(Driver d, std::size_t path, std::size_t k0, std::size_t k1) const {
    return cumulative(d, path, k1) - cumulative(d, path, k0);
  }
  // Linear interpolation between grid samples.
  double interpolate(Driver d, std::size_t path, double t) const;
  // Integral between arbitrary times, consistent with the grid trapezoid.
  double integral(Driver d, std::size_t path, double t0, double t1) const;

  double tau_investor(std::size_t path) const { return tau_I_[path]; }
  double tau_counterparty(std::size_t path) const { return tau_C_[path]; }
  double tau(std::size_t path) const { return std::min(tau_I_[path], tau_C_[path]); }
  Defaulter defaulter(std::size_t path) const;

  // Overrides for tests and replay.
  void set_default_times(std::size_t path, double tau_investor, double tau_counterparty);

 private:
  friend ScenarioSet simulate_scenarios(const DriverConfig&, const SimulationGrid&, std::size_t,
                                        std::uint64_t, unsigned);
  friend ScenarioSet read_scenarios(const std::filesystem::path&, const DriverConfig&,
                                    const SimulationGrid&);
  friend void write_scenarios(const ScenarioSet&, const std::filesystem::path&);

  struct Series {
    bool stochastic = false;
    std::vector<double> data;
    std::vector<double> cumulative;
  };
  double cumulative_at(Driver d, std::size_t path, double t) const;
  void build_cumulative(Driver d);

  DriverConfig config_;
  SimulationGrid grid_;
  std::size_t n_paths_ = 0;
  std::uint64_t seed_ = 0;
  std::array<Series, kDriverCount> series_;
  std::vector<double> tau_I_;
  std::vector<double> tau_C_;
  SimulationDiagnostics diagnostics_;
};

ScenarioSet simulate_scenarios(const DriverConfig& config, const SimulationGrid& grid,
                               std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

struct DefaultTimes {
  double investor;
  double counterparty;
};

// Default times of one path under a Gaussian copula. Intensities are sampled
// on `times`; u1, u2 are independent uniforms in (0, 1). Never crossing the
// exponential threshold gives +infinity.
DefaultTimes sample_default_times(std::span<const double> times, std::span<const double> lambda_I,
                                  std::span<const double> lambda_C, double rho, double u1,
                                  double u2);

// First t with integral_0^t lambda = threshold, linear interpolation of the
// trapezoid cumulative; +infinity if never reached.
double first_crossing(std::span<const double> times, std::span<const double> cumulative,
                      double threshold);

// exp(-integral of r) from t_{k0} to t_{k1} on one path.
double discount_factor(const ScenarioSet& s, std::size_t path, std::size_t k0, std::size_t k1);
// Same with another rate driver as the discount rate (funding numeraires).
double discount_factor(const ScenarioSet& s, Driver rate, std::size_t path, std::size_t k0,
                       std::size_t k1);
// Off-grid version, r linearly interpolated.
double discount_between(const ScenarioSet& s, std::size_t path, double t0, double t1);

// Price at t of a zero-coupon bond paying 1 at T under the short-rate driver
// (r or r_foreign). Deterministic drivers use the grid trapezoid so that it
// agrees with discount_factor; Vasicek uses the affine closed form.
double zero_coupon_bond(const ScenarioSet& s, Driver short_rate, std::size_t path, double t,
                        double T);

// 1 / (1 + (T - t) rate).
double simple_zcb(double rate, double t, double T);

// Closed-form Vasicek bond price.
double vasicek_bond(const VasicekProcess& p, double rate, double tenor);

// Columnar binary dump: magic "CFBV", version, n_paths, n_times, driver list,
// then little-endian float64 data and the default times.
void write_scenarios(const ScenarioSet& s, const std::filesystem::path& file);
ScenarioSet read_scenarios(const std::filesystem::path& file, const DriverConfig& config,
                           const SimulationGrid& grid);

// Empirical first-to-default intensity of a party: defaults of that party
// first, over the alive-path exposure time, within [0, horizon].
double first_to_default_intensity(const ScenarioSet& s, Defaulter party, double horizon);

}  // namespace cfbva

#endif
