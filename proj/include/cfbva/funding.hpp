#ifndef CFBVA_FUNDING_HPP
#define CFBVA_FUNDING_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "cfbva/market.hpp"
#include "cfbva/rates.hpp"

namespace cfbva {

// treasury: the desk funds at f+/f- as quoted. direct_market: the borrowing
// bond is adjusted for the funder's own default risk.
enum class FundingMode { treasury, direct_market };
enum class LiquidityScope { micro, macro_asymmetric, macro_symmetric };

struct LiquidityPolicy {
  FundingMode mode = FundingMode::treasury;
  LiquidityScope scope = LiquidityScope::macro_asymmetric;
  RateSource borrow = RateSource::risk_free();  // f+
  RateSource lend = RateSource::risk_free();    // f-
  std::optional<RateSource> hedge_borrow;       // h+, defaults to f+
  std::optional<RateSource> hedge_lend;         // h-, defaults to f-
  std::optional<double> funder_recovery;        // direct_market only; defaults to R_I

  void validate() const;
  // Same rate on both sides and no default adjustment.
  bool symmetric(double investor_recovery) const;
  RateSource hedge_rate(double balance) const;
};

// f+ for a positive position, f- for a negative one, 0 when flat.
double effective_funding_rate(double f_plus, double f_minus, double position);
// F = V - C - H; C drops out without rehypothecation, H under the measure change.
double funding_position(double value, double collateral, double hedge, bool rehypothecation,
                        bool explicit_hedge);
// P^{f+} / (LGD * survival + R) for the direct-market borrowing bond.
double risky_adjusted_funding_bond(double funding_bond, double survival, double lgd);
// F (1 - P / P^f)
double funding_cost_term(double position, double riskfree_bond, double funding_bond);
// H (P / P^f - P / P^h)
double hedge_carry_term(double hedge, double riskfree_bond, double funding_bond,
                        double hedging_bond);

struct FundingBonds {
  double riskfree;  // P
  double borrow;    // P^{f+}, default-adjusted in direct_market mode
  double lend;      // P^{f-}
  double hedge_borrow;
  double hedge_lend;
  double for_position(double f) const { return f < 0.0 ? lend : borrow; }
  double hedge_for(double h) const { return h < 0.0 ? hedge_lend : hedge_borrow; }
};

FundingBonds funding_bonds(const ScenarioSet& s, const LiquidityPolicy& policy,
                           double investor_recovery, std::size_t path, std::size_t k0,
                           std::size_t k1);

// F and H per funding date and path (funding-date major).
struct FundingLedger {
  std::vector<std::size_t> dates;
  std::size_t n_paths = 0;
  std::vector<double> position;
  std::vector<double> hedge;  // empty when no explicit hedge

  double F(std::size_t j, std::size_t p) const { return position[j * n_paths + p]; }
  double H(std::size_t j, std::size_t p) const { return hedge.empty() ? 0.0 : hedge[j * n_paths + p]; }
};

// Pathwise funding cost phi(0, T ^ tau; F) from a funding ledger.
double funding_cost_phi(const ScenarioSet& s, const LiquidityPolicy& policy,
                        double investor_recovery, const FundingLedger& ledger, std::size_t path);
// Pathwise funding plus hedge-carry cost from a ledger holding F and H.
double hedging_cost_phi(const ScenarioSet& s, const LiquidityPolicy& policy,
                        double investor_recovery, const FundingLedger& ledger, std::size_t path);

// Solves V = C + H + F for F given the continuation E = E[D V_next + payoff]
// with the sign of F selecting f+ or f-. Returns 0 when neither side is
// consistent.
double resolve_funding(double continuation, double collateral, double hedge,
                       const FundingBonds& bonds);

}  // namespace cfbva

#endif
