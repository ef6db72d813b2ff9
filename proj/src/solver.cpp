#include "cfbva/solver.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cfbva/errors.hpp"
#include "cfbva/parallel.hpp"

namespace cfbva {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::string_view, kComponentCount> kComponentNames = {
    "cash_flows", "closeout", "margining", "funding", "cva", "dva", "rehypothecation"};

void require_finite(double v, std::size_t path, double t, const char* what) {
  if (!std::isfinite(v))
    throw SolverError(std::string("non-finite ") + what + " on path " + std::to_string(path) +
                      " at t=" + std::to_string(t));
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments moments(const std::vector<double>& x) {
  const auto n = static_cast<double>(x.size());
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.std_error = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return m;
}

}  // namespace

std::string_view component_name(std::size_t c) { return kComponentNames.at(c); }

double Decomposition::total() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

double IntervalPayoff::total() const { return std::accumulate(parts.begin(), parts.end(), 0.0); }

std::vector<Driver> default_state_drivers(const ScenarioSet& s) {
  std::vector<Driver> out;
  for (Driver d : {Driver::underlying, Driver::r, Driver::lambda_I, Driver::lambda_C, Driver::fx})
    if (s.stochastic(d)) out.push_back(d);
  return out;
}

// ---------------------------------------------------------------- context

PricingContext::PricingContext(const PricingProblem& problem, const PricingOptions& options)
    : problem_(problem),
      schedule_(problem.deal, problem.scenario.grid()),
      model_(problem.scenario, problem.csa) {
  const ScenarioSet& s = problem.scenario;
  problem.csa.validate();
  problem.liquidity.validate();
  problem.closeout.validate(problem.csa);
  if (problem.regression.degree < 0) throw ConfigError("run.degree: must be >= 0");
  if (s.n_paths() > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("run.paths: too many paths");

  state_drivers_ = problem.regression.state.empty() ? default_state_drivers(s)
                                                    : problem.regression.state;
  all_paths_.resize(s.n_paths());
  std::iota(all_paths_.begin(), all_paths_.end(), 0u);

  const double maturity = s.grid().maturity();
  default_bracket_.assign(s.n_paths(), kNone);
  for (std::size_t p = 0; p < s.n_paths(); ++p)
    if (s.tau(p) < maturity) default_bracket_[p] = s.grid().bracket(s.tau(p));

  const bool collateralized = problem.csa.alpha > 0.0 && model_.n_dates() > 0;
  if (collateralized) {
    std::vector<double> eps;
    collateral_sweeps(std::max<std::size_t>(options.collateral_sweeps, 1), eps);
    closeout_.collateral_value = std::move(eps);
  } else {
    ledger_ = CollateralLedger(model_.dates(), s.n_paths(),
                               std::vector<double>(model_.n_dates() * s.n_paths(), 0.0));
  }
  if (problem.closeout.uses(CloseoutKind::risk_free)) {
    std::vector<double> eps;
    risk_free_sweep(eps);
    closeout_.risk_free = std::move(eps);
  }
  if (problem.closeout.uses(CloseoutKind::risk_free_with_funding)) {
    std::vector<double> eps;
    funded_sweep(eps);
    closeout_.funded = std::move(eps);
  }
}

std::vector<std::span<const double>> PricingContext::state(std::size_t k) const {
  std::vector<std::span<const double>> out;
  for (Driver d : state_drivers_)
    if (problem_.scenario.stochastic(d)) out.push_back(problem_.scenario.column(d, k));
  return out;
}

void PricingContext::fit_all_paths(std::size_t k, std::span<double> target) {
  LeastSquares fit(state(k), all_paths_, problem_.regression.degree,
                   problem_.regression.paths_per_basis);
  if (fit.diagnostics().degree_fallback) ++fallbacks_;
  fit.project(target);
}

// Default-free, unfunded continuation value on the master grid.
void PricingContext::risk_free_sweep(std::vector<double>& eps) {
  const ScenarioSet& s = problem_.scenario;
  const std::size_t n = s.n_paths();
  const auto& t = s.grid().times;
  eps.assign(n, kNaN);
  std::vector<double> v(n, 0.0);
  for (std::size_t k = s.grid().last(); k-- > 0;) {
    for (std::size_t p = 0; p < n; ++p) {
      v[p] = discount_factor(s, p, k, k + 1) * (v[p] + schedule_.cashflow(s, p, k + 1));
      require_finite(v[p], p, t[k], "risk-free continuation");
    }
    fit_all_paths(k, v);
    for (std::size_t p = 0; p < n; ++p)
      if (default_bracket_[p] == k)
        eps[p] = v[p] / zero_coupon_bond(s, Driver::r, p, t[k], s.tau(p));
  }
}

// Collateral mark-to-market M_k = E_k[D (M_{k+1} + cf)] + margining cost of
// the period starting at k, and the ledger built from it.
void PricingContext::collateral_sweeps(std::size_t sweeps, std::vector<double>& eps) {
  const ScenarioSet& s = problem_.scenario;
  const CsaTerms& csa = problem_.csa;
  const std::size_t n = s.n_paths();
  const auto& t = s.grid().times;
  std::vector<double> surface(model_.n_dates() * n, 0.0);
  std::vector<double> m(n);
  eps.assign(n, kNaN);

  for (std::size_t sweep = 1; sweep <= sweeps; ++sweep) {
    const bool last_sweep = sweep == sweeps;
    std::fill(m.begin(), m.end(), 0.0);
    const std::size_t top = model_.margin_index(s.grid().last());
    if (top != CollateralModel::npos)
      std::fill(surface.begin() + top * n, surface.begin() + (top + 1) * n, 0.0);

    for (std::size_t k = s.grid().last(); k-- > 0;) {
      for (std::size_t p = 0; p < n; ++p) {
        m[p] = discount_factor(s, p, k, k + 1) * (m[p] + schedule_.cashflow(s, p, k + 1));
        require_finite(m[p], p, t[k], "collateral mark-to-market");
      }
      fit_all_paths(k, m);
      const std::size_t md = model_.margin_index(k);
      if (md != CollateralModel::npos) {
        double* row = surface.data() + md * n;
        if (model_.accrues(md)) {
          for (std::size_t p = 0; p < n; ++p) {
            const CollateralBonds b = model_.bonds(p, md);
            if (sweep == 1) {
              m[p] = solve_collateral_mtm(m[p], csa, b.carry / b.plus, b.carry / b.minus);
            } else {
              const double previous = row[p];
              if (previous != 0.0)
                m[p] += margining_cost_term(previous, b.carry, b.for_balance(previous));
            }
          }
        }
        std::copy(m.begin(), m.end(), row);
      }
      if (last_sweep)
        for (std::size_t p = 0; p < n; ++p)
          if (default_bracket_[p] == k)
            eps[p] = collateral_target(m[p] / zero_coupon_bond(s, Driver::r, p, t[k], s.tau(p)),
                                       csa);
    }
    ledger_ = build_collateral_ledger(model_, std::move(surface));
    if (!last_sweep) {
      surface.resize(model_.n_dates() * n);
      for (std::size_t d = 0; d < model_.n_dates(); ++d)
        for (std::size_t p = 0; p < n; ++p) surface[d * n + p] = ledger_.posted(d, p);
    }
  }
}

// Default-free continuation funded at f+/f- on the funding dates.
void PricingContext::funded_sweep(std::vector<double>& eps) {
  const ScenarioSet& s = problem_.scenario;
  const std::size_t n = s.n_paths();
  const auto& grid = s.grid();
  const auto& t = grid.times;
  std::vector<std::size_t> next_funding(grid.times.size(), kNone);
  for (std::size_t j = 0; j + 1 < grid.funding.size(); ++j)
    next_funding[grid.funding[j]] = grid.funding[j + 1];

  eps.assign(n, kNaN);
  std::vector<double> w(n, 0.0);
  for (std::size_t k = grid.last(); k-- > 0;) {
    for (std::size_t p = 0; p < n; ++p) {
      w[p] = discount_factor(s, p, k, k + 1) * (w[p] + schedule_.cashflow(s, p, k + 1));
      require_finite(w[p], p, t[k], "funded continuation");
    }
    fit_all_paths(k, w);
    if (next_funding[k] != kNone)
      for (std::size_t p = 0; p < n; ++p)
        w[p] = resolve_funding(w[p], 0.0, 0.0,
                               funding_bonds(s, problem_.liquidity,
                                             problem_.csa.recovery.investor, p, k,
                                             next_funding[k]));
    for (std::size_t p = 0; p < n; ++p)
      if (default_bracket_[p] == k)
        eps[p] = w[p] / zero_coupon_bond(s, Driver::r, p, t[k], s.tau(p));
  }
}

double PricingContext::collateral_balance(std::size_t path, std::size_t k) const {
  const ScenarioSet& s = problem_.scenario;
  const auto& dates = model_.dates();
  const auto it = std::upper_bound(dates.begin(), dates.end(), k);
  if (it == dates.begin()) return 0.0;
  const std::size_t m = static_cast<std::size_t>(it - dates.begin()) - 1;
  if (!model_.accrues(m)) return 0.0;
  const double posted = ledger_.posted(m, path);
  if (dates[m] == k || posted == 0.0) return posted;
  const CsaTerms& csa = problem_.csa;
  const double bond =
      period_bond(s, posted < 0.0 ? csa.accrual_minus : csa.accrual_plus, path, dates[m], k);
  if (csa.currency == CollateralCurrency::domestic) return posted / bond;
  return s.value(Driver::fx, path, k) * (posted / s.value(Driver::fx, path, dates[m])) / bond;
}

OnDefaultOutcome PricingContext::default_outcome(std::size_t path) const {
  const ScenarioSet& s = problem_.scenario;
  if (default_bracket_[path] == kNone)
    throw UsageError("default_outcome: path " + std::to_string(path) +
                     " does not default before maturity");
  OnDefaultOutcome out;
  out.path = path;
  out.tau = s.tau(path);
  out.defaulter = s.defaulter(path);
  const CloseoutAmounts eps = closeout_amount(problem_.closeout, closeout_, path);
  out.epsilon = out.defaulter == Defaulter::counterparty ? eps.investor : eps.counterparty;
  out.collateral = pre_default_collateral(model_, ledger_, path);
  out.theta = on_default_theta(out.epsilon, out.collateral, problem_.csa.recovery, out.defaulter);
  return out;
}

IntervalPayoff PricingContext::interval_payoff(std::size_t path, std::size_t k0,
                                               std::size_t k1) const {
  const ScenarioSet& s = problem_.scenario;
  const auto& t = s.grid().times;
  const double tau = s.tau(path);
  IntervalPayoff out;
  if (!(tau > t[k0])) return out;

  for (std::size_t k = k0 + 1; k <= k1; ++k) {
    if (t[k] > tau) break;
    if (schedule_.pays_at(k))
      out.parts[kCashFlows] += discount_factor(s, path, k0, k) * schedule_.cashflow(s, path, k);
  }
  for (std::size_t k = k0; k < k1; ++k) {
    if (!(t[k] < tau)) break;
    const std::size_t m = model_.margin_index(k);
    if (m == CollateralModel::npos || !model_.accrues(m)) continue;
    const double balance = ledger_.posted(m, path);
    if (balance == 0.0) continue;
    const CollateralBonds b = model_.bonds(path, m);
    out.parts[kMargining] += discount_factor(s, path, k0, k) *
                             margining_cost_term(balance, b.carry, b.for_balance(balance));
  }
  if (default_bracket_[path] != kNone && tau <= t[k1]) {
    const OnDefaultOutcome o = default_outcome(path);
    const double d = discount_between(s, path, t[k0], tau);
    out.parts[kCloseout] = d * o.theta.closeout;
    out.parts[kCva] = d * o.theta.cva;
    out.parts[kDva] = d * o.theta.dva;
    out.parts[kRehypothecation] = d * o.theta.rehypothecation;
  }
  return out;
}

IntervalPayoff PricingContext::total_payoff(std::size_t path) const {
  const ScenarioSet& s = problem_.scenario;
  const auto& t = s.grid().times;
  const double tau = s.tau(path);
  IntervalPayoff out;
  for (std::size_t k = 1; k < t.size() && t[k] <= tau; ++k)
    out.parts[kCashFlows] += discount_factor(s, path, 0, k) * schedule_.cashflow(s, path, k);
  out.parts[kMargining] = margining_cost_gamma(model_, ledger_, path, 0);
  if (default_bracket_[path] != kNone) {
    const OnDefaultOutcome o = default_outcome(path);
    const double d = discount_between(s, path, 0.0, tau);
    out.parts[kCloseout] = d * o.theta.closeout;
    out.parts[kCva] = d * o.theta.cva;
    out.parts[kDva] = d * o.theta.dva;
    out.parts[kRehypothecation] = d * o.theta.rehypothecation;
  }
  return out;
}

// ---------------------------------------------------------------- backward recursion

PricingRun backward_cfbva_run(const PricingContext& ctx, const PricingOptions& options) {
  const PricingProblem& problem = ctx.problem();
  const ScenarioSet& s = problem.scenario;
  const auto& grid = s.grid();
  const auto& t = grid.times;
  const auto& J = grid.funding;
  const std::size_t n = s.n_paths();
  const bool explicit_hedge = options.hedge != nullptr;
  if (explicit_hedge && options.hedge->size() != J.size() * n)
    throw UsageError("backward_cfbva: hedge ledger must have funding dates x paths entries");
  const bool rehyp = problem.csa.rehypothecation;
  const double recovery_I = problem.csa.recovery.investor;

  PricingRun run;
  PricingResult& res = run.result;
  res.n_paths = n;
  res.n_times = s.n_times();
  res.continuation_fallbacks = ctx.continuation_fallbacks();

  std::array<std::vector<double>, kComponentCount> comp;
  for (auto& c : comp) c.assign(n, 0.0);
  std::vector<double>& pathwise = run.artifacts.pathwise;
  pathwise.assign(n, 0.0);
  std::vector<double> total(n, 0.0);
  std::vector<std::uint32_t> alive;
  alive.reserve(n);

  if (options.keep_funding_ledger) {
    FundingLedger ledger;
    ledger.dates = J;
    ledger.n_paths = n;
    ledger.position.assign(J.size() * n, 0.0);
    if (explicit_hedge) ledger.hedge = *options.hedge;
    run.artifacts.funding = std::move(ledger);
  }
  auto hedge_at = [&](std::size_t j, std::size_t p) {
    return explicit_hedge ? (*options.hedge)[j * n + p] : 0.0;
  };

  for (std::size_t j = J.size() - 1; j-- > 0;) {
    const std::size_t a = J[j];
    const std::size_t b = J[j + 1];
    alive.clear();
    parallel_for(n, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        const double tau = s.tau(p);
        const IntervalPayoff ip = ctx.interval_payoff(p, a, b);
        const double carry = tau > t[b] ? discount_factor(s, p, a, b) : 0.0;
        double sum = 0.0;
        for (std::size_t c = 0; c < kComponentCount; ++c) {
          comp[c][p] = carry * comp[c][p] + ip.parts[c];
          sum += comp[c][p];
        }
        require_finite(sum, p, t[a], "interval payoff");
        total[p] = sum;
        if (tau > t[a]) pathwise[p] += discount_factor(s, p, 0, a) * ip.total();
      }
    });
    for (std::size_t p = 0; p < n; ++p)
      if (s.tau(p) > t[a]) alive.push_back(static_cast<std::uint32_t>(p));
    if (alive.empty()) continue;

    LeastSquares fit(ctx.state(a), alive, problem.regression.degree,
                     problem.regression.paths_per_basis);
    std::vector<std::span<double>> targets;
    for (auto& c : comp) targets.emplace_back(c);
    fit.project(targets);

    StepDiagnostics step{a, t[a], fit.diagnostics()};
    double ss = 0.0;
    for (auto p : alive) {
      double fitted = 0.0;
      for (std::size_t c = 0; c < kComponentCount; ++c) fitted += comp[c][p];
      ss += (total[p] - fitted) * (total[p] - fitted);
      total[p] = fitted;
    }
    step.regression.residual_rms = std::sqrt(ss / static_cast<double>(alive.size()));
    res.steps.push_back(step);

    std::size_t mismatches = 0;
    for (auto p : alive) {
      const double e = total[p];
      const double c = rehyp ? ctx.collateral_balance(p, a) : 0.0;
      const double h = hedge_at(j, p);
      const FundingBonds bonds = funding_bonds(s, problem.liquidity, recovery_I, p, a, b);
      const double f = resolve_funding(e, c, h, bonds);
      const double value = c + h + f;
      const double phi = value - e;
      require_finite(value, p, t[a], "funded value");
      if (h == 0.0) {
        // Post-hoc check of the split resolution: F = (P^{f+/-}/P) (E - C)^{+/-}.
        const double gap = e - c;
        const double expected = gap * (gap > 0.0 ? bonds.borrow : bonds.lend) / bonds.riskfree;
        if (std::abs(f - expected) > 1e-10 * std::max(1.0, std::abs(expected))) ++mismatches;
      }
      comp[kFunding][p] += phi;
      pathwise[p] += discount_factor(s, p, 0, a) * phi;
      if (run.artifacts.funding) run.artifacts.funding->position[j * n + p] = f;
    }
    res.resolution_mismatches += mismatches;
  }

  for (std::size_t c = 0; c < kComponentCount; ++c)
    res.decomposition.values[c] =
        std::accumulate(comp[c].begin(), comp[c].end(), 0.0) / static_cast<double>(n);
  res.value = res.decomposition.total();
  const Moments m = moments(pathwise);
  res.pathwise_mean = m.mean;
  res.std_error = m.std_error;

  const double maturity = grid.maturity();
  for (std::size_t p = 0; p < n; ++p) {
    if (!(s.tau(p) < maturity)) continue;
    (s.defaulter(p) == Defaulter::investor ? res.investor_defaults : res.counterparty_defaults)++;
    if (options.keep_outcomes) run.artifacts.outcomes.push_back(ctx.default_outcome(p));
  }
  return run;
}

PricingResult backward_cfbva_price(const PricingProblem& problem, const PricingOptions& options) {
  const PricingContext ctx(problem, options);
  return backward_cfbva_run(ctx, options).result;
}

// ---------------------------------------------------------------- forward oracle

PricingResult forward_pathwise_oracle(const PricingContext& ctx, const PricingOptions& options) {
  const PricingProblem& problem = ctx.problem();
  const ScenarioSet& s = problem.scenario;
  const auto& t = s.grid().times;
  const auto& J = s.grid().funding;
  const std::size_t n = s.n_paths();
  const double recovery_I = problem.csa.recovery.investor;
  if (!problem.liquidity.symmetric(recovery_I))
    throw UsageError("forward_pathwise_oracle: requires symmetric funding (f+ == f-)");
  const bool explicit_hedge = options.hedge != nullptr;
  if (explicit_hedge && options.hedge->size() != J.size() * n)
    throw UsageError("forward_pathwise_oracle: hedge ledger has the wrong shape");
  const bool rehyp = problem.csa.rehypothecation;
  auto hedge_at = [&](std::size_t j, std::size_t p) {
    return explicit_hedge ? (*options.hedge)[j * n + p] : 0.0;
  };

  std::vector<double> g(n, 0.0);
  parallel_for(n, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const double tau = s.tau(p);
      double compound = 1.0;
      double sum = 0.0;
      for (std::size_t j = 0; j + 1 < J.size(); ++j) {
        const std::size_t a = J[j];
        const std::size_t b = J[j + 1];
        if (!(tau > t[a])) break;
        const FundingBonds bonds = funding_bonds(s, problem.liquidity, recovery_I, p, a, b);
        const double rho = bonds.borrow / bonds.riskfree;
        const double c = rehyp ? ctx.collateral_balance(p, a) : 0.0;
        const double h = hedge_at(j, p);
        double next = 0.0;
        // Nothing is held past the last funding date.
        if (tau > t[b] && j + 2 < J.size())
          next = discount_factor(s, p, a, b) *
                 ((rehyp ? ctx.collateral_balance(p, b) : 0.0) + hedge_at(j + 1, p));
        const double ph = h != 0.0 ? bonds.riskfree / bonds.hedge_for(h) : 0.0;
        const double step = rho * (ctx.interval_payoff(p, a, b).total() + next - c - h) +
                            h * (1.0 - rho * ph);
        sum += compound * discount_factor(s, p, 0, a) * step;
        compound *= rho;
      }
      g[p] = sum + (rehyp ? ctx.collateral_balance(p, 0) : 0.0) + hedge_at(0, p);
    }
  });

  PricingResult res;
  res.n_paths = n;
  res.n_times = s.n_times();
  const Moments m = moments(g);
  res.value = m.mean;
  res.pathwise_mean = res.value;
  res.std_error = m.std_error;
  return res;
}

}  // namespace cfbva
