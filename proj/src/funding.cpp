#include "cfbva/funding.hpp"

#include <cmath>
#include <string>

#include "cfbva/errors.hpp"

namespace cfbva {

void LiquidityPolicy::validate() const {
  if (scope == LiquidityScope::macro_symmetric) {
    if (!(borrow == lend))
      throw ConfigError("liquidity.f_minus: macro_symmetric scope requires f_minus == f_plus");
    if (hedge_borrow.has_value() != hedge_lend.has_value() ||
        (hedge_borrow && !(*hedge_borrow == *hedge_lend)))
      throw ConfigError("liquidity.h_minus: macro_symmetric scope requires h_minus == h_plus");
  }
  if (funder_recovery && !(*funder_recovery >= 0.0 && *funder_recovery <= 1.0))
    throw ConfigError("liquidity.funder_recovery: must be in [0, 1]");
}

bool LiquidityPolicy::symmetric(double investor_recovery) const {
  if (!(borrow == lend)) return false;
  if (hedge_borrow.has_value() != hedge_lend.has_value()) return false;
  if (hedge_borrow && !(*hedge_borrow == *hedge_lend)) return false;
  return mode == FundingMode::treasury || funder_recovery.value_or(investor_recovery) == 1.0;
}

RateSource LiquidityPolicy::hedge_rate(double balance) const {
  if (balance < 0.0) return hedge_lend.value_or(lend);
  return hedge_borrow.value_or(borrow);
}

double effective_funding_rate(double f_plus, double f_minus, double position) {
  if (position > 0.0) return f_plus;
  if (position < 0.0) return f_minus;
  return 0.0;
}

double funding_position(double value, double collateral, double hedge, bool rehypothecation,
                        bool explicit_hedge) {
  return value - (rehypothecation ? collateral : 0.0) - (explicit_hedge ? hedge : 0.0);
}

double risky_adjusted_funding_bond(double funding_bond, double survival, double lgd) {
  const double denom = lgd * survival + (1.0 - lgd);
  if (!(denom > 0.0))
    throw NumericDomainError("risky_adjusted_funding_bond: LGD * survival + R is not positive");
  return funding_bond / denom;
}

double funding_cost_term(double position, double riskfree_bond, double funding_bond) {
  if (!(funding_bond > 0.0))
    throw NumericDomainError("funding_cost_term: funding bond must be positive");
  return position * (1.0 - riskfree_bond / funding_bond);
}

double hedge_carry_term(double hedge, double riskfree_bond, double funding_bond,
                        double hedging_bond) {
  if (!(funding_bond > 0.0) || !(hedging_bond > 0.0))
    throw NumericDomainError("hedge_carry_term: bonds must be positive");
  return hedge * (riskfree_bond / funding_bond - riskfree_bond / hedging_bond);
}

FundingBonds funding_bonds(const ScenarioSet& s, const LiquidityPolicy& policy,
                           double investor_recovery, std::size_t path, std::size_t k0,
                           std::size_t k1) {
  FundingBonds b{};
  b.riskfree = riskfree_bond(s, path, k0, k1);
  b.borrow = period_bond(s, policy.borrow, path, k0, k1);
  b.lend = period_bond(s, policy.lend, path, k0, k1);
  if (policy.mode == FundingMode::direct_market) {
    const double recovery = policy.funder_recovery.value_or(investor_recovery);
    const double survival = std::exp(-s.integral(Driver::lambda_I, path, k0, k1));
    b.borrow = risky_adjusted_funding_bond(b.borrow, survival, 1.0 - recovery);
  }
  b.hedge_borrow =
      policy.hedge_borrow ? period_bond(s, *policy.hedge_borrow, path, k0, k1) : b.borrow;
  b.hedge_lend = policy.hedge_lend ? period_bond(s, *policy.hedge_lend, path, k0, k1) : b.lend;
  return b;
}

namespace {

double ledger_cost(const ScenarioSet& s, const LiquidityPolicy& policy, double investor_recovery,
                   const FundingLedger& ledger, std::size_t path, bool with_hedge) {
  const double horizon = std::min(s.grid().maturity(), s.tau(path));
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < ledger.dates.size(); ++j) {
    const std::size_t k0 = ledger.dates[j];
    if (!(s.grid().times[k0] < horizon)) break;
    const FundingBonds b =
        funding_bonds(s, policy, investor_recovery, path, k0, ledger.dates[j + 1]);
    const double f = ledger.F(j, path);
    double cost = funding_cost_term(f, b.riskfree, b.for_position(f));
    if (with_hedge) {
      const double h = ledger.H(j, path);
      if (h != 0.0) cost += hedge_carry_term(h, b.riskfree, b.for_position(f), b.hedge_for(h));
    }
    total += discount_factor(s, path, 0, k0) * cost;
  }
  return total;
}

}  // namespace

double funding_cost_phi(const ScenarioSet& s, const LiquidityPolicy& policy,
                        double investor_recovery, const FundingLedger& ledger, std::size_t path) {
  return ledger_cost(s, policy, investor_recovery, ledger, path, false);
}

double hedging_cost_phi(const ScenarioSet& s, const LiquidityPolicy& policy,
                        double investor_recovery, const FundingLedger& ledger, std::size_t path) {
  return ledger_cost(s, policy, investor_recovery, ledger, path, true);
}

double resolve_funding(double continuation, double collateral, double hedge,
                       const FundingBonds& bonds) {
  const double ph = hedge != 0.0 ? bonds.riskfree / bonds.hedge_for(hedge) : 0.0;
  auto candidate = [&](double funding_bond) {
    const double q = bonds.riskfree / funding_bond;
    return (continuation - collateral - hedge - hedge * ph + hedge * q) / q;
  };
  const double up = candidate(bonds.borrow);
  if (up > 0.0) return up;
  const double down = candidate(bonds.lend);
  if (down < 0.0) return down;
  return 0.0;
}

}  // namespace cfbva
