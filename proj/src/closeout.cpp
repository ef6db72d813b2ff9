#include "cfbva/closeout.hpp"

#include <algorithm>
#include <string>

#include "cfbva/errors.hpp"

namespace cfbva {

namespace {

double pos(double x) { return std::max(x, 0.0); }
double neg(double x) { return std::min(x, 0.0); }

const char* name(CloseoutKind k) {
  switch (k) {
    case CloseoutKind::risk_free:
      return "risk_free";
    case CloseoutKind::collateral_value:
      return "collateral_value";
    case CloseoutKind::risk_free_with_funding:
      return "risk_free_with_funding";
  }
  return "?";
}

}  // namespace

void CloseoutConvention::validate(const CsaTerms& csa) const {
  if (uses(CloseoutKind::collateral_value) && !(csa.alpha > 0.0))
    throw ConfigError("closeout.kind: collateral_value requires a collateralized CSA (csa.alpha > 0)");
}

const std::vector<double>* ContinuationValues::of(CloseoutKind k) const {
  const std::optional<std::vector<double>>* slot = nullptr;
  switch (k) {
    case CloseoutKind::risk_free:
      slot = &risk_free;
      break;
    case CloseoutKind::collateral_value:
      slot = &collateral_value;
      break;
    case CloseoutKind::risk_free_with_funding:
      slot = &funded;
      break;
  }
  return slot && slot->has_value() ? &**slot : nullptr;
}

CloseoutAmounts closeout_amount(const CloseoutConvention& convention,
                                const ContinuationValues& values, std::size_t path) {
  auto lookup = [&](CloseoutKind k) {
    const auto* v = values.of(k);
    if (!v)
      throw ConfigError(std::string("closeout: convention ") + name(k) +
                        " has no continuation values (missing ledger or liquidity policy)");
    if (path >= v->size()) throw UsageError("closeout_amount: path out of range");
    return (*v)[path];
  };
  return {lookup(convention.kind_for(Defaulter::counterparty)),
          lookup(convention.kind_for(Defaulter::investor))};
}

ThetaBreakdown on_default_theta(double epsilon, double collateral, const Recoveries& r,
                                Defaulter defaulter) {
  ThetaBreakdown out;
  out.closeout = epsilon;
  switch (defaulter) {
    case Defaulter::counterparty:
      out.cva = -r.lgd_counterparty() * pos(pos(epsilon) - pos(collateral));
      out.rehypothecation =
          -r.lgd_counterparty_collateral() * pos(neg(epsilon) - neg(collateral));
      break;
    case Defaulter::investor:
      out.dva = -r.lgd_investor() * neg(neg(epsilon) - neg(collateral));
      out.rehypothecation = -r.lgd_investor_collateral() * neg(pos(epsilon) - pos(collateral));
      break;
    case Defaulter::none:
      throw UsageError("on_default_theta: no defaulting party");
  }
  out.theta = out.closeout + out.cva + out.dva + out.rehypothecation;
  return out;
}

double on_default_settlement(double epsilon, double collateral, const Recoveries& r,
                             Defaulter defaulter) {
  const double gap = epsilon - collateral;
  const bool e_pos = epsilon >= 0.0;
  const bool c_pos = collateral >= 0.0;
  if (defaulter == Defaulter::counterparty) {
    const double rc = r.counterparty;
    const double rc_col = r.counterparty_collateral;
    if (!e_pos && c_pos) return gap;
    if (!e_pos && !c_pos) return neg(gap) + rc_col * pos(gap);
    if (e_pos && c_pos) return neg(gap) + rc * pos(gap);
    return rc * epsilon - rc_col * collateral;
  }
  if (defaulter == Defaulter::investor) {
    const double ri = r.investor;
    const double ri_col = r.investor_collateral;
    if (e_pos && !c_pos) return gap;
    if (e_pos && c_pos) return pos(gap) + ri_col * neg(gap);
    if (!e_pos && !c_pos) return pos(gap) + ri * neg(gap);
    return ri * epsilon - ri_col * collateral;
  }
  throw UsageError("on_default_settlement: no defaulting party");
}

}  // namespace cfbva
