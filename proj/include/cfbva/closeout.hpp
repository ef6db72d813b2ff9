#ifndef CFBVA_CLOSEOUT_HPP
#define CFBVA_CLOSEOUT_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "cfbva/collateral.hpp"
#include "cfbva/market.hpp"

namespace cfbva {

enum class CloseoutKind {
  risk_free,               // default-free, unfunded continuation value
  collateral_value,        // the margin rule applied at tau
  risk_free_with_funding,  // default-free continuation funded at f+/f-
};

// epsilon_I (the investor's valuation) settles a counterparty default and
// epsilon_C an investor default. With `symmetric` both use the investor kind.
struct CloseoutConvention {
  CloseoutKind investor = CloseoutKind::risk_free;
  CloseoutKind counterparty = CloseoutKind::risk_free;
  bool symmetric = true;

  CloseoutKind kind_for(Defaulter d) const {
    return symmetric || d == Defaulter::counterparty ? investor : counterparty;
  }
  bool uses(CloseoutKind k) const { return investor == k || (!symmetric && counterparty == k); }
  void validate(const CsaTerms& csa) const;
};

// Close-out values of each defaulted path, already carried to tau. NaN marks
// paths without a default before maturity.
struct ContinuationValues {
  std::optional<std::vector<double>> risk_free;
  std::optional<std::vector<double>> collateral_value;
  std::optional<std::vector<double>> funded;

  const std::vector<double>* of(CloseoutKind k) const;
};

struct CloseoutAmounts {
  double investor;      // epsilon_I, used when the counterparty defaults
  double counterparty;  // epsilon_C, used when the investor defaults
};
CloseoutAmounts closeout_amount(const CloseoutConvention& convention,
                                const ContinuationValues& values, std::size_t path);

// Components of the on-default cash flow: theta = closeout + cva + dva + rehypothecation.
struct ThetaBreakdown {
  double theta = 0.0;
  double closeout = 0.0;
  double cva = 0.0;              // <= 0, counterparty default
  double dva = 0.0;              // >= 0, investor default
  double rehypothecation = 0.0;  // loss (or gain) on rehypothecated collateral
};

// epsilon is the close-out amount of the surviving party's convention and
// collateral the pre-default balance C_{tau-}.
ThetaBreakdown on_default_theta(double epsilon, double collateral, const Recoveries& r,
                                Defaulter defaulter);

// Net settlement flow on default by case analysis over the signs of the
// close-out and the collateral. theta == flow + collateral.
double on_default_settlement(double epsilon, double collateral, const Recoveries& r,
                             Defaulter defaulter);

struct OnDefaultOutcome {
  std::size_t path;
  double tau;
  Defaulter defaulter;
  double epsilon;
  double collateral;
  ThetaBreakdown theta;
};

}  // namespace cfbva

#endif
