#include "cfbva/collateral.hpp"

#include <cmath>
#include <string>

#include "cfbva/errors.hpp"

namespace cfbva {

void CsaTerms::validate() const {
  auto unit = [](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("csa.") + field + ": must be in [0, 1]");
  };
  unit(alpha, "alpha");
  if (!(threshold >= 0.0) || !std::isfinite(threshold))
    throw ConfigError("csa.threshold: must be a finite value >= 0");
  if (!(minimum_transfer >= 0.0) || !std::isfinite(minimum_transfer))
    throw ConfigError("csa.mta: must be a finite value >= 0");
  unit(recovery.investor, "R_I");
  unit(recovery.counterparty, "R_C");
  unit(recovery.investor_collateral, "R_prime_I");
  unit(recovery.counterparty_collateral, "R_prime_C");
  if (!rehypothecation) {
    if (recovery.investor_collateral != 1.0)
      throw ConfigError("csa.R_prime_I: must be 1 without rehypothecation");
    if (recovery.counterparty_collateral != 1.0)
      throw ConfigError("csa.R_prime_C: must be 1 without rehypothecation");
  }
  if (recovery.investor > recovery.investor_collateral)
    throw ConfigError("csa.R_I: must not exceed R_prime_I");
  if (recovery.counterparty > recovery.counterparty_collateral)
    throw ConfigError("csa.R_C: must not exceed R_prime_C");
  if (!std::isfinite(settlement_basis)) throw ConfigError("csa.settlement_basis: must be finite");
  if (currency == CollateralCurrency::domestic && settlement_basis != 0.0)
    throw ConfigError("csa.settlement_basis: only applies to foreign collateral");
}

double effective_collateral_rate(double c_plus, double c_minus, double balance) {
  if (balance > 0.0) return c_plus;
  if (balance < 0.0) return c_minus;
  return 0.0;
}

double collateral_target(double mtm, const CsaTerms& csa) {
  const double excess = std::max(std::abs(mtm) - csa.threshold, 0.0);
  if (excess == 0.0) return 0.0;
  return csa.alpha * (mtm < 0.0 ? -excess : excess);
}

double accrue_collateral(double balance, double c_plus, double c_minus, double t0, double t1) {
  if (balance > 0.0) return balance / simple_zcb(c_plus, t0, t1);
  if (balance < 0.0) return balance / simple_zcb(c_minus, t0, t1);
  return 0.0;
}

double margining_cost_term(double balance, double riskfree_bond, double collateral_bond) {
  if (!(collateral_bond > 0.0))
    throw NumericDomainError("margining_cost_term: collateral bond must be positive");
  return balance * (1.0 - riskfree_bond / collateral_bond);
}

double solve_collateral_mtm(double continuation, const CsaTerms& csa, double rho_plus,
                            double rho_minus) {
  const double h = csa.threshold;
  const double a = csa.alpha;
  if (continuation >= h && continuation > 0.0) {
    const double slope = 1.0 - a * (1.0 - rho_plus);
    if (!(slope > 0.0)) throw NumericDomainError("solve_collateral_mtm: non-monotone margin rule");
    return (continuation - a * h * (1.0 - rho_plus)) / slope;
  }
  if (continuation <= -h && continuation < 0.0) {
    const double slope = 1.0 - a * (1.0 - rho_minus);
    if (!(slope > 0.0)) throw NumericDomainError("solve_collateral_mtm: non-monotone margin rule");
    return (continuation + a * h * (1.0 - rho_minus)) / slope;
  }
  return continuation;
}

// ---------------------------------------------------------------- model

CollateralModel::CollateralModel(const ScenarioSet& s, const CsaTerms& csa)
    : s_(&s), csa_(&csa), dates_(s.grid().margining), lookup_(s.n_times(), npos) {
  for (std::size_t m = 0; m < dates_.size(); ++m) lookup_[dates_[m]] = m;
}

double CollateralModel::fx(std::size_t path, double t) const {
  return s_->interpolate(Driver::fx, path, t);
}

CollateralBonds CollateralModel::bonds(std::size_t path, std::size_t m) const {
  const std::size_t k0 = dates_[m];
  const std::size_t k1 = dates_[m + 1];
  CollateralBonds b{};
  if (csa_->currency == CollateralCurrency::domestic) {
    b.carry = riskfree_bond(*s_, path, k0, k1);
  } else {
    const double t0 = s_->grid().times[k0];
    const double t1 = s_->grid().times[k1];
    b.carry = zero_coupon_bond(*s_, Driver::r_foreign, path, t0, t1) *
              std::exp(-csa_->settlement_basis * (t1 - t0));
  }
  b.plus = period_bond(*s_, csa_->accrual_plus, path, k0, k1);
  b.minus = period_bond(*s_, csa_->accrual_minus, path, k0, k1);
  return b;
}

double CollateralModel::accrued(std::size_t path, std::size_t m, double posted) const {
  if (posted == 0.0) return 0.0;
  const CollateralBonds b = bonds(path, m);
  const double bond = b.for_balance(posted);
  if (csa_->currency == CollateralCurrency::domestic) return posted / bond;
  const double chi0 = s_->value(Driver::fx, path, dates_[m]);
  const double chi1 = s_->value(Driver::fx, path, dates_[m + 1]);
  return chi1 * (posted / chi0) / bond;
}

// ---------------------------------------------------------------- ledger

CollateralLedger::CollateralLedger(std::vector<std::size_t> dates, std::size_t n_paths,
                                   std::vector<double> values)
    : dates_(std::move(dates)), n_paths_(n_paths), values_(std::move(values)) {
  if (values_.size() != dates_.size() * n_paths_)
    throw UsageError("CollateralLedger: value count does not match dates x paths");
}

double CollateralLedger::held(const ScenarioSet& s, std::size_t m, std::size_t path) const {
  return s.grid().times[dates_[m]] < s.tau(path) ? posted(m, path) : 0.0;
}

CollateralLedger build_collateral_ledger(const CollateralModel& model, std::vector<double> mtm) {
  const std::size_t n = model.scenario().n_paths();
  const std::size_t nd = model.n_dates();
  if (mtm.size() != nd * n)
    throw UsageError("build_collateral_ledger: mark-to-market surface has the wrong shape");
  const CsaTerms& csa = model.csa();
  for (std::size_t p = 0; p < n; ++p) {
    double previous = 0.0;
    for (std::size_t m = 0; m < nd; ++m) {
      double& cell = mtm[m * n + p];
      if (!std::isfinite(cell))
        throw SolverError("collateral ledger: non-finite mark-to-market on path " +
                          std::to_string(p) + " at t=" + std::to_string(model.time(m)));
      if (m > 0) previous = model.accrued(p, m - 1, mtm[(m - 1) * n + p]);
      const double target = collateral_target(cell, csa);
      cell = std::abs(target - previous) < csa.minimum_transfer ? previous : target;
    }
  }
  return CollateralLedger(model.dates(), n, std::move(mtm));
}

double pre_default_collateral(const CollateralModel& model, const CollateralLedger& ledger,
                              std::size_t path) {
  const ScenarioSet& s = model.scenario();
  const double tau = s.tau(path);
  if (!std::isfinite(tau))
    throw UsageError("pre_default_collateral: path " + std::to_string(path) +
                     " has no default");
  std::size_t m = model.n_dates();
  while (m > 0 && !(model.time(m - 1) < tau)) --m;
  if (m == 0) return 0.0;
  --m;
  if (!model.accrues(m)) return 0.0;
  const double balance = ledger.posted(m, path);
  if (balance == 0.0) return 0.0;
  const double t1 = model.time(m + 1);
  const double bond = model.bonds(path, m).for_balance(balance);
  if (model.csa().currency == CollateralCurrency::domestic)
    return balance * zero_coupon_bond(s, Driver::r, path, tau, t1) / bond;
  const double foreign = balance / s.value(Driver::fx, path, model.date(m));
  const double carry = zero_coupon_bond(s, Driver::r_foreign, path, tau, t1) *
                       std::exp(-model.csa().settlement_basis * (t1 - tau));
  return model.fx(path, tau) * foreign * carry / bond;
}

double margining_cost_gamma(const CollateralModel& model, const CollateralLedger& ledger,
                            std::size_t path, std::size_t k) {
  const ScenarioSet& s = model.scenario();
  const double horizon = std::min(s.grid().maturity(), s.tau(path));
  const double t0 = s.grid().times[k];
  double total = 0.0;
  for (std::size_t m = 0; model.accrues(m); ++m) {
    const double tm = model.time(m);
    if (tm < t0) continue;
    if (!(tm < horizon)) break;
    const double balance = ledger.posted(m, path);
    if (balance == 0.0) continue;
    const CollateralBonds b = model.bonds(path, m);
    total += discount_factor(s, path, k, model.date(m)) *
             margining_cost_term(balance, b.carry, b.for_balance(balance));
  }
  return total;
}

double gamma_cashflow_oracle(const CollateralModel& model, const CollateralLedger& ledger,
                             std::size_t path) {
  const ScenarioSet& s = model.scenario();
  const double tau = s.tau(path);
  double total = 0.0;
  for (std::size_t m = 0; model.accrues(m); ++m) {
    if (!(model.time(m) < tau)) break;
    const double balance = ledger.posted(m, path);
    const double returned = model.accrued(path, m, balance);
    const double d0 = discount_factor(s, path, 0, model.date(m));
    const double d1 = discount_factor(s, path, 0, model.date(m + 1));
    total += d0 * balance - d1 * returned;
    if (tau <= model.time(m + 1)) total += d1 * returned;
  }
  return total;
}

}  // namespace cfbva
