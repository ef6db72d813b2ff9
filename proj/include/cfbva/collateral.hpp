#ifndef CFBVA_COLLATERAL_HPP
#define CFBVA_COLLATERAL_HPP

#include <cstddef>
#include <vector>

#include "cfbva/market.hpp"
#include "cfbva/rates.hpp"

namespace cfbva {

enum class CollateralCurrency { domestic, foreign };

// Recovery fractions. The primed ones apply to the rehypothecated collateral
// and must satisfy R <= R' <= 1.
struct Recoveries {
  double investor = 0.4;
  double counterparty = 0.4;
  double investor_collateral = 1.0;
  double counterparty_collateral = 1.0;

  double lgd_investor() const { return 1.0 - investor; }
  double lgd_counterparty() const { return 1.0 - counterparty; }
  double lgd_investor_collateral() const { return 1.0 - investor_collateral; }
  double lgd_counterparty_collateral() const { return 1.0 - counterparty_collateral; }
};

struct CsaTerms {
  double alpha = 0.0;  // collateralized fraction of the exposure
  double threshold = 0.0;
  double minimum_transfer = 0.0;
  bool rehypothecation = false;
  Recoveries recovery;
  CollateralCurrency currency = CollateralCurrency::domestic;
  // c+ applies to a positive balance (held by the investor), c- to a negative one.
  RateSource accrual_plus = RateSource::risk_free();
  RateSource accrual_minus = RateSource::risk_free();
  // Constant spread added to the foreign bond yield.
  double settlement_basis = 0.0;

  void validate() const;
};

// c+ for a positive balance, c- for a negative one, 0 for an empty account.
double effective_collateral_rate(double c_plus, double c_minus, double balance);
// alpha * sign(mtm) * max(|mtm| - threshold, 0)
double collateral_target(double mtm, const CsaTerms& csa);
// C- / P^{c-} + C+ / P^{c+} with simple bonds over [t0, t1].
double accrue_collateral(double balance, double c_plus, double c_minus, double t0, double t1);
// C (1 - P / P^c): cost of carrying the balance for one period.
double margining_cost_term(double balance, double riskfree_bond, double collateral_bond);
// Solves M = m + target(M) (1 - rho) where rho = carry bond / collateral bond
// on the side of the balance. Exact for the target rule.
double solve_collateral_mtm(double continuation, const CsaTerms& csa, double rho_plus,
                            double rho_minus);

struct CollateralBonds {
  double carry;  // P (domestic) or P^e (foreign) over the period
  double plus;   // P^{c+}
  double minus;  // P^{c-}
  double for_balance(double balance) const { return balance < 0.0 ? minus : plus; }
};

// Margining schedule and period bonds for one scenario set.
class CollateralModel {
 public:
  CollateralModel(const ScenarioSet& s, const CsaTerms& csa);

  const ScenarioSet& scenario() const { return *s_; }
  const CsaTerms& csa() const { return *csa_; }
  std::size_t n_dates() const { return dates_.size(); }
  std::size_t date(std::size_t m) const { return dates_[m]; }
  const std::vector<std::size_t>& dates() const { return dates_; }
  double time(std::size_t m) const { return s_->grid().times[dates_[m]]; }
  // The account is closed at the last margining date.
  bool accrues(std::size_t m) const { return m + 1 < dates_.size(); }
  // Margining date index at master index k, or npos.
  std::size_t margin_index(std::size_t k) const { return lookup_[k]; }

  CollateralBonds bonds(std::size_t path, std::size_t m) const;
  // Domestic value at t_{m+1} of the balance posted at t_m plus its accrual.
  double accrued(std::size_t path, std::size_t m, double posted) const;
  double fx(std::size_t path, double t) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  const ScenarioSet* s_;
  const CsaTerms* csa_;
  std::vector<std::size_t> dates_;
  std::vector<std::size_t> lookup_;
};

// Posted collateral per margining date and path, in domestic units. Values are
// stored unfrozen; held() applies the freeze at the first default.
class CollateralLedger {
 public:
  CollateralLedger() = default;
  CollateralLedger(std::vector<std::size_t> dates, std::size_t n_paths,
                   std::vector<double> values);

  std::size_t n_dates() const { return dates_.size(); }
  std::size_t n_paths() const { return n_paths_; }
  const std::vector<std::size_t>& dates() const { return dates_; }
  double posted(std::size_t m, std::size_t path) const { return values_[m * n_paths_ + path]; }
  double held(const ScenarioSet& s, std::size_t m, std::size_t path) const;
  bool empty() const { return values_.empty(); }

 private:
  std::vector<std::size_t> dates_;
  std::size_t n_paths_ = 0;
  std::vector<double> values_;
};

// Forward pass of the margin rule over an estimated mark-to-market surface
// (margining-date major, `mtm` is consumed as storage). A call smaller than
// the minimum transfer keeps the accrued previous balance.
CollateralLedger build_collateral_ledger(const CollateralModel& model, std::vector<double> mtm);

// Collateral just before the first default: the last posted balance accrued
// to tau at the collateral rate. Zero before the first margining date.
double pre_default_collateral(const CollateralModel& model, const CollateralLedger& ledger,
                              std::size_t path);

// Margining cost gamma(t_k, T ^ tau) on a path, discounted to t_k.
double margining_cost_gamma(const CollateralModel& model, const CollateralLedger& ledger,
                            std::size_t path, std::size_t k = 0);

// Pathwise collateral cash flows: postings, returns with accrual, and the
// accrued balance at the end of the default period, discounted to 0.
double gamma_cashflow_oracle(const CollateralModel& model, const CollateralLedger& ledger,
                             std::size_t path);

}  // namespace cfbva

#endif
