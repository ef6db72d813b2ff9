#include "cfbva/market.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <limits>
#include <numbers>
#include <string>

#include "cfbva/errors.hpp"
#include "cfbva/parallel.hpp"
#include "cfbva/rng.hpp"

namespace cfbva {

namespace {

constexpr std::array<std::string_view, kDriverCount> kDriverNames = {
    "r",       "c_plus",   "c_minus",  "f_plus", "f_minus", "h_plus",    "h_minus", "e",
    "l_plus",  "l_minus",  "lambda_I", "lambda_C", "fx",    "r_foreign", "S"};

constexpr std::uint32_t kCopulaChannel = static_cast<std::uint32_t>(kDriverCount);
constexpr std::size_t kMaxTieRedraws = 64;
constexpr double kInf = std::numeric_limits<double>::infinity();

double exponential_from_normal(double z) {
  // E = -log(1 - Phi(z)), computed without cancellation in either tail.
  double e = z < 0.0 ? -std::log1p(-0.5 * std::erfc(-z / std::numbers::sqrt2))
                     : -std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  if (!(e > 0.0)) e = std::numeric_limits<double>::min();
  return e;
}

DefaultTimes default_times_from_normals(std::span<const double> times,
                                        std::span<const double> cum_I,
                                        std::span<const double> cum_C, double rho, double z1,
                                        double z2) {
  const double zc = rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z2;
  return {first_crossing(times, cum_I, exponential_from_normal(z1)),
          first_crossing(times, cum_C, exponential_from_normal(zc))};
}

void trapezoid_cumulative(std::span<const double> times, std::span<const double> values,
                          std::span<double> out) {
  out[0] = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k)
    out[k] = out[k - 1] + 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
}

bool is_intensity(Driver d) { return d == Driver::lambda_I || d == Driver::lambda_C; }

Driver drift_driver(const GeometricBrownianProcess& g) {
  switch (g.drift) {
    case DriftMode::risk_free:
      return Driver::r;
    case DriftMode::funding:
      return g.side == RateSide::plus ? Driver::f_plus : Driver::f_minus;
    case DriftMode::hedging:
      return g.side == RateSide::plus ? Driver::h_plus : Driver::h_minus;
  }
  return Driver::r;
}

// Correlation factor L with L L^T = rho, via the eigen-decomposition.
Eigen::MatrixXd correlation_factor(const DriverConfig& c) {
  const auto n = static_cast<Eigen::Index>(c.correlated.size());
  if (n == 0) return {};
  Eigen::MatrixXd rho(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) rho(i, j) = c.correlation[i * n + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

std::string_view to_string(Driver d) { return kDriverNames[index(d)]; }

std::optional<Driver> parse_driver(std::string_view name) {
  for (std::size_t i = 0; i < kDriverCount; ++i)
    if (kDriverNames[i] == name) return static_cast<Driver>(i);
  return std::nullopt;
}

bool is_rate(Driver d) { return d != Driver::fx && d != Driver::underlying; }

// ---------------------------------------------------------------- grid

SimulationGrid SimulationGrid::uniform(double maturity, std::size_t steps,
                                       std::size_t margining_stride, std::size_t funding_stride) {
  if (!(maturity > 0.0) || !std::isfinite(maturity))
    throw ConfigError("model.grid.maturity: must be positive");
  if (steps == 0) throw ConfigError("model.grid.steps: must be positive");
  SimulationGrid g;
  g.times.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    g.times[k] = maturity * static_cast<double>(k) / static_cast<double>(steps);
  g.times.back() = maturity;
  auto subset = [&](std::size_t stride, const char* field) {
    if (stride == 0) throw ConfigError(std::string("model.grid.") + field + ": must be positive");
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < steps; k += stride) out.push_back(k);
    out.push_back(steps);
    return out;
  };
  g.margining = subset(margining_stride, "margining_stride");
  g.funding = subset(funding_stride, "funding_stride");
  return g;
}

void SimulationGrid::validate() const {
  if (times.size() < 2) throw ConfigError("model.grid: needs at least two times");
  if (times.front() != 0.0) throw ConfigError("model.grid: first time must be 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]) || !std::isfinite(times[k]))
      throw ConfigError("model.grid: times must be finite and strictly increasing");
  auto check_subset = [&](const std::vector<std::size_t>& s, const char* name) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= times.size())
        throw ConfigError(std::string("model.grid.") + name + ": index out of range");
      if (i > 0 && s[i] <= s[i - 1])
        throw ConfigError(std::string("model.grid.") + name + ": indices must be increasing");
    }
  };
  check_subset(margining, "margining");
  check_subset(funding, "funding");
  if (funding.size() < 2 || funding.front() != 0 || funding.back() != last())
    throw ConfigError("model.grid.funding: must start at 0 and end at maturity");
}

std::size_t SimulationGrid::index_of(double t) const {
  const double tol = 1e-9 * std::max(1.0, maturity());
  const std::size_t k = bracket(t + tol);
  if (std::abs(times[k] - t) > tol)
    throw ConfigError("time " + std::to_string(t) + " is not on the simulation grid");
  return k;
}

std::size_t SimulationGrid::bracket(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

// ---------------------------------------------------------------- drivers

DriverConfig::DriverConfig() {
  for (auto& p : process) p = DeterministicProcess{Curve(0.0)};
  (*this)[Driver::fx] = DeterministicProcess{Curve(1.0)};
}

bool DriverConfig::stochastic(Driver d) const {
  return !std::holds_alternative<DeterministicProcess>((*this)[d]);
}

void DriverConfig::validate() const {
  for (std::size_t i = 0; i < kDriverCount; ++i) {
    const auto d = static_cast<Driver>(i);
    const std::string field = "model.drivers." + std::string(to_string(d));
    if (const auto* v = std::get_if<VasicekProcess>(&process[i])) {
      if (!is_rate(d)) throw ConfigError(field + ": vasicek is only valid for rate drivers");
      if (!(v->mean_reversion > 0.0))
        throw ConfigError(field + ".mean_reversion: must be positive");
      if (!(v->volatility >= 0.0)) throw ConfigError(field + ".volatility: must be >= 0");
      if (!std::isfinite(v->long_run) || !std::isfinite(v->initial))
        throw ConfigError(field + ": non-finite parameter");
    } else if (const auto* g = std::get_if<GeometricBrownianProcess>(&process[i])) {
      if (is_rate(d)) throw ConfigError(field + ": gbm is only valid for S and fx");
      if (!(g->initial > 0.0)) throw ConfigError(field + ".initial: must be positive");
      if (!(g->volatility >= 0.0)) throw ConfigError(field + ".volatility: must be >= 0");
      if (g->yield_driver && !is_rate(*g->yield_driver))
        throw ConfigError(field + ".yield_driver: must be a rate driver");
    }
  }
  const std::size_t n = correlated.size();
  if (correlation.size() != n * n)
    throw ConfigError("model.correlation.matrix: must be " + std::to_string(n) + "x" +
                      std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!stochastic(correlated[i]))
      throw ConfigError("model.correlation.drivers: " + std::string(to_string(correlated[i])) +
                        " is not stochastic");
    for (std::size_t j = 0; j < i; ++j)
      if (correlated[i] == correlated[j])
        throw ConfigError("model.correlation.drivers: duplicate driver");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = correlation[i * n + j];
      if (!(std::abs(v) <= 1.0) || v != correlation[j * n + i])
        throw ConfigError("model.correlation.matrix: entries must be symmetric and in [-1, 1]");
    }
    if (correlation[i * n + i] != 1.0)
      throw ConfigError("model.correlation.matrix: diagonal must be 1");
  }
  if (n > 0) {
    Eigen::MatrixXd rho(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) rho(i, j) = correlation[i * n + j];
    const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(rho).eigenvalues()(0);
    if (smallest < -1e-12)
      throw ConfigError("model.correlation.matrix: not positive semi-definite (eigenvalue " +
                        std::to_string(smallest) + ")");
  }
  if (!(std::abs(default_correlation) <= 1.0))
    throw ConfigError("model.default_correlation: must be in [-1, 1]");
}

// ---------------------------------------------------------------- scenario set

std::span<const double> ScenarioSet::column(Driver d, std::size_t k) const {
  const Series& s = series_[index(d)];
  if (!s.stochastic)
    throw UsageError("column: driver " + std::string(to_string(d)) + " is deterministic");
  return {s.data.data() + k * n_paths_, n_paths_};
}

double ScenarioSet::interpolate(Driver d, std::size_t path, double t) const {
  const std::size_t k = grid_.bracket(t);
  if (k >= grid_.last()) return value(d, path, grid_.last());
  const double w = (t - grid_.times[k]) / (grid_.times[k + 1] - grid_.times[k]);
  const double a = value(d, path, k);
  return a + w * (value(d, path, k + 1) - a);
}

double ScenarioSet::cumulative_at(Driver d, std::size_t path, double t) const {
  const std::size_t k = grid_.bracket(t);
  const double dt = t - grid_.times[k];
  if (dt == 0.0) return cumulative(d, path, k);
  return cumulative(d, path, k) + 0.5 * dt * (value(d, path, k) + interpolate(d, path, t));
}

double ScenarioSet::integral(Driver d, std::size_t path, double t0, double t1) const {
  return cumulative_at(d, path, t1) - cumulative_at(d, path, t0);
}

Defaulter ScenarioSet::defaulter(std::size_t path) const {
  const double ti = tau_I_[path];
  const double tc = tau_C_[path];
  if (std::isinf(ti) && std::isinf(tc)) return Defaulter::none;
  return ti < tc ? Defaulter::investor : Defaulter::counterparty;
}

void ScenarioSet::set_default_times(std::size_t path, double tau_investor,
                                    double tau_counterparty) {
  if (tau_investor == tau_counterparty && std::isfinite(tau_investor))
    throw UsageError("set_default_times: simultaneous defaults are not allowed");
  if (!(tau_investor > 0.0) || !(tau_counterparty > 0.0))
    throw UsageError("set_default_times: default times must be positive");
  tau_I_[path] = tau_investor;
  tau_C_[path] = tau_counterparty;
}

void ScenarioSet::build_cumulative(Driver d) {
  Series& s = series_[index(d)];
  const std::size_t nt = n_times();
  const auto& t = grid_.times;
  if (!s.stochastic) {
    s.cumulative.assign(nt, 0.0);
    trapezoid_cumulative(t, s.data, s.cumulative);
    return;
  }
  s.cumulative.assign(nt * n_paths_, 0.0);
  for (std::size_t k = 1; k < nt; ++k) {
    const double half = 0.5 * (t[k] - t[k - 1]);
    const double* prev = s.data.data() + (k - 1) * n_paths_;
    const double* cur = s.data.data() + k * n_paths_;
    const double* cprev = s.cumulative.data() + (k - 1) * n_paths_;
    double* out = s.cumulative.data() + k * n_paths_;
    for (std::size_t p = 0; p < n_paths_; ++p) out[p] = cprev[p] + half * (prev[p] + cur[p]);
  }
}

ScenarioSet simulate_scenarios(const DriverConfig& config, const SimulationGrid& grid,
                               std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  config.validate();
  grid.validate();
  if (n_paths == 0) throw ConfigError("run.paths: must be positive");

  ScenarioSet out;
  out.config_ = config;
  out.grid_ = grid;
  out.n_paths_ = n_paths;
  out.seed_ = seed;
  const std::size_t nt = grid.times.size();
  const auto& t = grid.times;

  std::vector<Driver> vasicek, gbm;
  for (std::size_t i = 0; i < kDriverCount; ++i) {
    const auto d = static_cast<Driver>(i);
    auto& s = out.series_[i];
    s.stochastic = config.stochastic(d);
    if (!s.stochastic) {
      const auto& curve = std::get<DeterministicProcess>(config[d]).curve;
      s.data.resize(nt);
      for (std::size_t k = 0; k < nt; ++k) s.data[k] = curve(t[k]);
      continue;
    }
    s.data.assign(nt * n_paths, 0.0);
    (std::holds_alternative<VasicekProcess>(config[d]) ? vasicek : gbm).push_back(d);
  }

  // Correlated normals: drivers listed in the correlation block are mixed by
  // the factor; all others draw independently.
  const Eigen::MatrixXd factor = correlation_factor(config);
  std::array<int, kDriverCount> slot;
  slot.fill(-1);
  for (std::size_t i = 0; i < config.correlated.size(); ++i)
    slot[index(config.correlated[i])] = static_cast<int>(i);

  std::vector<Driver> stochastic_drivers = vasicek;
  stochastic_drivers.insert(stochastic_drivers.end(), gbm.begin(), gbm.end());

  std::array<std::size_t, kDriverCount> floored{};
  std::mutex floor_guard;

  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    std::array<std::size_t, kDriverCount> local_floored{};
    std::array<double, kDriverCount> state{};
    std::array<double, kDriverCount> z{};
    Eigen::VectorXd block_z(static_cast<Eigen::Index>(config.correlated.size()));
    for (std::size_t p = begin; p < end; ++p) {
      for (Driver d : vasicek) state[index(d)] = std::get<VasicekProcess>(config[d]).initial;
      for (Driver d : gbm)
        state[index(d)] = std::log(std::get<GeometricBrownianProcess>(config[d]).initial);
      auto store = [&](Driver d, std::size_t k) {
        double v = state[index(d)];
        if (std::holds_alternative<GeometricBrownianProcess>(config[d])) {
          v = std::exp(v);
        } else if (is_intensity(d) && v < 0.0) {
          v = 0.0;
          ++local_floored[index(d)];
        }
        out.series_[index(d)].data[k * n_paths + p] = v;
      };
      for (Driver d : stochastic_drivers) store(d, 0);

      for (std::size_t k = 0; k + 1 < nt; ++k) {
        const double dt = t[k + 1] - t[k];
        for (Driver d : stochastic_drivers)
          z[index(d)] = PathStream(seed, p, static_cast<std::uint32_t>(index(d)))
                            .normal(static_cast<std::uint32_t>(k));
        if (block_z.size() > 0) {
          for (std::size_t i = 0; i < config.correlated.size(); ++i)
            block_z(static_cast<Eigen::Index>(i)) = z[index(config.correlated[i])];
          const Eigen::VectorXd mixed = factor * block_z;
          for (std::size_t i = 0; i < config.correlated.size(); ++i)
            z[index(config.correlated[i])] = mixed(static_cast<Eigen::Index>(i));
        }
        for (Driver d : vasicek) {
          const auto& v = std::get<VasicekProcess>(config[d]);
          const double decay = std::exp(-v.mean_reversion * dt);
          const double sd =
              v.volatility * std::sqrt(-std::expm1(-2.0 * v.mean_reversion * dt) /
                                       (2.0 * v.mean_reversion));
          state[index(d)] = state[index(d)] * decay + v.long_run * (1.0 - decay) + sd * z[index(d)];
          store(d, k + 1);
        }
        for (Driver d : gbm) {
          const auto& g = std::get<GeometricBrownianProcess>(config[d]);
          const Driver mu = drift_driver(g);
          double carry = out.value(mu, p, k) + out.value(mu, p, k + 1);
          if (g.yield_driver)
            carry -= out.value(*g.yield_driver, p, k) + out.value(*g.yield_driver, p, k + 1);
          else
            carry -= 2.0 * g.dividend_yield;
          state[index(d)] += 0.5 * dt * carry - 0.5 * g.volatility * g.volatility * dt +
                             g.volatility * std::sqrt(dt) * z[index(d)];
          store(d, k + 1);
        }
      }
    }
    std::lock_guard lock(floor_guard);
    for (std::size_t i = 0; i < kDriverCount; ++i) floored[i] += local_floored[i];
  });
  out.diagnostics_.floored = floored;

  for (std::size_t i = 0; i < kDriverCount; ++i)
    if (is_rate(static_cast<Driver>(i))) out.build_cumulative(static_cast<Driver>(i));

  out.tau_I_.assign(n_paths, kInf);
  out.tau_C_.assign(n_paths, kInf);
  std::size_t ties = 0;
  std::mutex tie_guard;
  parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> cum_I(nt), cum_C(nt);
    std::size_t local_ties = 0;
    for (std::size_t p = begin; p < end; ++p) {
      for (std::size_t k = 0; k < nt; ++k) {
        cum_I[k] = out.cumulative(Driver::lambda_I, p, k);
        cum_C[k] = out.cumulative(Driver::lambda_C, p, k);
      }
      const PathStream stream(seed, p, kCopulaChannel);
      for (std::uint32_t attempt = 0;; ++attempt) {
        if (attempt == kMaxTieRedraws)
          throw SolverError("default sampling: simultaneous defaults persist on path " +
                            std::to_string(p));
        const auto [z1, z2] = stream.normals(attempt);
        const auto draw =
            default_times_from_normals(t, cum_I, cum_C, config.default_correlation, z1, z2);
        if (draw.investor == draw.counterparty && std::isfinite(draw.investor)) {
          ++local_ties;
          continue;
        }
        out.tau_I_[p] = draw.investor;
        out.tau_C_[p] = draw.counterparty;
        break;
      }
    }
    std::lock_guard lock(tie_guard);
    ties += local_ties;
  });
  out.diagnostics_.default_ties = ties;
  return out;
}

double first_crossing(std::span<const double> times, std::span<const double> cumulative,
                      double threshold) {
  if (threshold <= cumulative[0]) return times[0];
  const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), threshold);
  if (it == cumulative.end()) return kInf;
  const std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
  const double w = (threshold - cumulative[k - 1]) / (cumulative[k] - cumulative[k - 1]);
  return times[k - 1] + w * (times[k] - times[k - 1]);
}

DefaultTimes sample_default_times(std::span<const double> times, std::span<const double> lambda_I,
                                  std::span<const double> lambda_C, double rho, double u1,
                                  double u2) {
  if (lambda_I.size() != times.size() || lambda_C.size() != times.size())
    throw UsageError("sample_default_times: intensity and time lengths differ");
  if (!(std::abs(rho) <= 1.0)) throw ConfigError("default_correlation: must be in [-1, 1]");
  if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0))
    throw UsageError("sample_default_times: uniforms must lie in (0, 1)");
  std::vector<double> cum_I(times.size()), cum_C(times.size());
  trapezoid_cumulative(times, lambda_I, cum_I);
  trapezoid_cumulative(times, lambda_C, cum_C);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return default_times_from_normals(times, cum_I, cum_C, rho, radius * std::cos(angle),
                                    radius * std::sin(angle));
}

// ---------------------------------------------------------------- discounting

double discount_factor(const ScenarioSet& s, std::size_t path, std::size_t k0, std::size_t k1) {
  return std::exp(-s.integral(Driver::r, path, k0, k1));
}

double discount_factor(const ScenarioSet& s, Driver rate, std::size_t path, std::size_t k0,
                       std::size_t k1) {
  return std::exp(-s.integral(rate, path, k0, k1));
}

double discount_between(const ScenarioSet& s, std::size_t path, double t0, double t1) {
  return std::exp(-s.integral(Driver::r, path, t0, t1));
}

double vasicek_bond(const VasicekProcess& p, double rate, double tenor) {
  const double a = p.mean_reversion;
  const double b = -std::expm1(-a * tenor) / a;
  const double s2 = p.volatility * p.volatility;
  const double log_a = (p.long_run - s2 / (2.0 * a * a)) * (b - tenor) - s2 * b * b / (4.0 * a);
  return std::exp(log_a - b * rate);
}

double zero_coupon_bond(const ScenarioSet& s, Driver short_rate, std::size_t path, double t,
                        double T) {
  if (T < t) throw UsageError("zero_coupon_bond: maturity precedes valuation time");
  const auto& proc = s.config()[short_rate];
  if (std::holds_alternative<DeterministicProcess>(proc))
    return std::exp(-s.integral(short_rate, path, t, T));
  if (const auto* v = std::get_if<VasicekProcess>(&proc))
    return vasicek_bond(*v, s.interpolate(short_rate, path, t), T - t);
  throw UsageError("zero_coupon_bond: " + std::string(to_string(short_rate)) +
                   " is not a short-rate driver");
}

double simple_zcb(double rate, double t, double T) {
  const double denom = 1.0 + (T - t) * rate;
  if (!(denom > 0.0))
    throw NumericDomainError("simple_zcb: 1 + (T - t) x = " + std::to_string(denom) +
                             " is not positive");
  return 1.0 / denom;
}

// ---------------------------------------------------------------- binary dump

namespace {

constexpr char kMagic[4] = {'C', 'F', 'B', 'V'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "scenario dumps are written in host order, which must be little-endian");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_doubles(std::ostream& os, const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put(os, std::bit_cast<std::uint64_t>(p[i]));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw ConfigError("scenario dump: truncated file");
  return v;
}
void get_doubles(std::istream& is, double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = std::bit_cast<double>(get<std::uint64_t>(is));
}

}  // namespace

void write_scenarios(const ScenarioSet& s, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + file.string() + " for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, s.n_paths());
  put<std::uint64_t>(os, s.n_times());
  put<std::uint64_t>(os, s.seed());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(kDriverCount));
  for (std::size_t i = 0; i < kDriverCount; ++i) {
    const auto name = to_string(static_cast<Driver>(i));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(i));
    put<std::uint8_t>(os, s.series_[i].stochastic ? 1 : 0);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  put_doubles(os, s.grid().times.data(), s.n_times());
  for (const auto& series : s.series_) put_doubles(os, series.data.data(), series.data.size());
  put_doubles(os, s.tau_I_.data(), s.n_paths());
  put_doubles(os, s.tau_C_.data(), s.n_paths());
  for (std::size_t f : s.diagnostics_.floored) put<std::uint64_t>(os, f);
  put<std::uint64_t>(os, s.diagnostics_.default_ties);
  if (!os) throw ConfigError("error writing " + file.string());
}

ScenarioSet read_scenarios(const std::filesystem::path& file, const DriverConfig& config,
                           const SimulationGrid& grid) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + file.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("scenario dump: bad magic in " + file.string());
  if (get<std::uint32_t>(is) != kVersion) throw ConfigError("scenario dump: unsupported version");
  ScenarioSet out;
  out.config_ = config;
  out.grid_ = grid;
  out.n_paths_ = get<std::uint64_t>(is);
  const std::size_t nt = get<std::uint64_t>(is);
  out.seed_ = get<std::uint64_t>(is);
  if (nt != grid.times.size()) throw ConfigError("scenario dump: grid size mismatch");
  if (get<std::uint32_t>(is) != kDriverCount) throw ConfigError("scenario dump: driver count");
  for (std::size_t i = 0; i < kDriverCount; ++i) {
    if (get<std::uint8_t>(is) != i) throw ConfigError("scenario dump: driver order");
    out.series_[i].stochastic = get<std::uint8_t>(is) != 0;
    std::string name(get<std::uint16_t>(is), '\0');
    is.read(name.data(), static_cast<std::streamsize>(name.size()));
    if (name != to_string(static_cast<Driver>(i)))
      throw ConfigError("scenario dump: unexpected driver " + name);
    if (out.series_[i].stochastic != config.stochastic(static_cast<Driver>(i)))
      throw ConfigError("scenario dump: driver " + name + " does not match the configuration");
  }
  std::vector<double> times(nt);
  get_doubles(is, times.data(), nt);
  if (times != grid.times) throw ConfigError("scenario dump: grid times mismatch");
  for (auto& series : out.series_) {
    series.data.resize(series.stochastic ? nt * out.n_paths_ : nt);
    get_doubles(is, series.data.data(), series.data.size());
  }
  out.tau_I_.resize(out.n_paths_);
  out.tau_C_.resize(out.n_paths_);
  get_doubles(is, out.tau_I_.data(), out.n_paths_);
  get_doubles(is, out.tau_C_.data(), out.n_paths_);
  for (auto& f : out.diagnostics_.floored) f = get<std::uint64_t>(is);
  out.diagnostics_.default_ties = get<std::uint64_t>(is);
  for (std::size_t i = 0; i < kDriverCount; ++i)
    if (is_rate(static_cast<Driver>(i))) out.build_cumulative(static_cast<Driver>(i));
  return out;
}

double first_to_default_intensity(const ScenarioSet& s, Defaulter party, double horizon) {
  double exposure = 0.0;
  std::size_t events = 0;
  for (std::size_t p = 0; p < s.n_paths(); ++p) {
    const double tau = s.tau(p);
    exposure += std::min(tau, horizon);
    if (tau <= horizon && s.defaulter(p) == party) ++events;
  }
  return exposure > 0.0 ? static_cast<double>(events) / exposure : 0.0;
}

}  // namespace cfbva
