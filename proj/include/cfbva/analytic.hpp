#ifndef CFBVA_ANALYTIC_HPP
#define CFBVA_ANALYTIC_HPP

#include "cfbva/curve.hpp"
#include "cfbva/deal.hpp"
#include "cfbva/market.hpp"

namespace cfbva {

// Perfectly collateralized value: flows discounted at the collateral rate.
// Fixed flows only.
double analytic_perfect_collateral(const Deal& deal, const Curve& collateral_rate);
// Same for flows on the underlying: the average over the scenario paths.
double analytic_perfect_collateral(const Deal& deal, const Curve& collateral_rate,
                                   const ScenarioSet& s);

// Foreign-currency collateral: flows discounted at c - r^e + r.
double analytic_foreign_collateral(const Deal& deal, const Curve& collateral_rate,
                                   const Curve& riskfree, const Curve& foreign_riskfree);
double analytic_foreign_collateral(const Deal& deal, const Curve& collateral_rate,
                                   const Curve& riskfree, const Curve& foreign_riskfree,
                                   const ScenarioSet& s);

// Centrally cleared deal with a margin jump at default. Intensities are the
// first-to-default ones; the survival to u uses both.
struct CcpInputs {
  Curve collateral_rate;
  Curve overnight;        // e
  Curve liquidity_plus;   // l+
  Curve liquidity_minus;  // l-
  Curve lambda_C;         // lambda^{C<I}
  Curve lambda_I;         // lambda^{I<C}
  double lgd_C = 1.0;
  double lgd_I = 1.0;
  Curve jump;  // C_u - C_{u-} at default
};

struct CcpValue {
  double value;
  double perfect;           // value without gap risk
  double counterparty_gap;  // subtracted term on counterparty default (>= 0 for J >= 0)
  double investor_gap;      // subtracted term on investor default
};

CcpValue analytic_ccp_gap_risk(const Deal& deal, const CcpInputs& inputs);

// Closed form of one gap term for flat curves: `lambda` is the defaulter's
// first-to-default intensity and `other_intensity` the survivor's.
double ccp_gap_closed_form(double lgd, double jump, double lambda, double other_intensity,
                           double liquidity, double overnight, double horizon);

// Uncollateralized deal funded at f+/f-, close-out at the funded default-free
// value W. Fixed flows only.
struct UncollateralizedInputs {
  Curve f_plus;
  Curve f_minus;
  Curve lambda_C;  // lambda^{C<I}
  Curve lambda_I;  // lambda^{I<C}
  double lgd_C = 1.0;
  double lgd_I = 1.0;
};

struct UncollateralizedValue {
  double value;
  double funded;  // W(0)
  double cva;     // subtracted counterparty term
  double dva;     // subtracted investor term
};

UncollateralizedValue analytic_uncollateralized_fva(const Deal& deal,
                                                    const UncollateralizedInputs& inputs);

}  // namespace cfbva

#endif
