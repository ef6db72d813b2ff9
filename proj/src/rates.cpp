#include "cfbva/rates.hpp"

#include <sstream>

#include "cfbva/errors.hpp"

namespace cfbva {

std::string RateSource::describe() const {
  std::ostringstream os;
  os << (driver ? std::string(to_string(*driver)) : std::string("risk_free"));
  if (spread != 0.0) os << (spread > 0 ? "+" : "") << spread;
  return os.str();
}

double period_bond(const ScenarioSet& s, const RateSource& source, std::size_t path,
                   std::size_t k0, std::size_t k1) {
  const double t0 = s.grid().times[k0];
  const double t1 = s.grid().times[k1];
  if (!source.driver) {
    const double p = riskfree_bond(s, path, k0, k1);
    if (source.spread == 0.0) return p;
    const double denom = 1.0 / p + (t1 - t0) * source.spread;
    if (!(denom > 0.0)) throw NumericDomainError("period_bond: non-positive accrual factor");
    return 1.0 / denom;
  }
  return simple_zcb(s.value(*source.driver, path, k0) + source.spread, t0, t1);
}

bool is_deterministic(const ScenarioSet& s, const RateSource& source) {
  if (source.driver) return !s.stochastic(*source.driver);
  return !s.stochastic(Driver::r);
}

}  // namespace cfbva
