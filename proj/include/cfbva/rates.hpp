#ifndef CFBVA_RATES_HPP
#define CFBVA_RATES_HPP

#include <optional>
#include <string>

#include "cfbva/market.hpp"

namespace cfbva {

// Where an accrual rate (collateral, funding, hedging) comes from. Without a
// driver the rate is the simple rate implied by the risk-free bond over the
// period, so that a zero spread reproduces P exactly.
struct RateSource {
  std::optional<Driver> driver;
  double spread = 0.0;

  static RateSource risk_free(double spread = 0.0) { return {std::nullopt, spread}; }
  static RateSource of(Driver d, double spread = 0.0) { return {d, spread}; }

  bool operator==(const RateSource&) const = default;
  std::string describe() const;
};

// Bond paying 1 at t_{k1} accruing at the source rate fixed at t_{k0}.
double period_bond(const ScenarioSet& s, const RateSource& source, std::size_t path,
                   std::size_t k0, std::size_t k1);

// Risk-free bond P_{t_{k0}}(t_{k1}).
inline double riskfree_bond(const ScenarioSet& s, std::size_t path, std::size_t k0,
                            std::size_t k1) {
  return zero_coupon_bond(s, Driver::r, path, s.grid().times[k0], s.grid().times[k1]);
}

// True when the source rate is the same on every path.
bool is_deterministic(const ScenarioSet& s, const RateSource& source);

}  // namespace cfbva

#endif
