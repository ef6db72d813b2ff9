#include "cfbva/deal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfbva/errors.hpp"

namespace cfbva {

double payoff(const Cashflow& flow, double spot) {
  switch (flow.kind) {
    case PayoffKind::fixed:
      return flow.amount;
    case PayoffKind::linear:
      return flow.amount * (spot - flow.strike);
    case PayoffKind::call:
      return flow.amount * std::max(spot - flow.strike, 0.0);
  }
  return 0.0;
}

bool Deal::uses_underlying() const {
  return std::any_of(cashflows.begin(), cashflows.end(),
                     [](const Cashflow& c) { return c.kind != PayoffKind::fixed; });
}

double Deal::maturity() const {
  double t = 0.0;
  for (const auto& c : cashflows) t = std::max(t, c.time);
  return t;
}

void Deal::validate() const {
  if (cashflows.empty()) throw ConfigError("deal.cashflows: at least one flow is required");
  for (std::size_t i = 0; i < cashflows.size(); ++i) {
    const auto& c = cashflows[i];
    const std::string field = "deal.cashflows[" + std::to_string(i) + "]";
    if (!(c.time > 0.0) || !std::isfinite(c.time))
      throw ConfigError(field + ".time: must be positive");
    if (!std::isfinite(c.amount) || !std::isfinite(c.strike))
      throw ConfigError(field + ": non-finite amount or strike");
  }
}

ScheduledDeal::ScheduledDeal(const Deal& deal, const SimulationGrid& grid)
    : at_(grid.times.size()) {
  deal.validate();
  for (const auto& c : deal.cashflows) {
    if (c.time > grid.maturity() * (1.0 + 1e-12))
      throw ConfigError("deal: flow at " + std::to_string(c.time) + " is beyond the grid");
    at_[grid.index_of(c.time)].push_back(c);
  }
}

double ScheduledDeal::cashflow(const ScenarioSet& s, std::size_t path, std::size_t k) const {
  double total = 0.0;
  for (const auto& c : at_[k])
    total += payoff(c, c.kind == PayoffKind::fixed ? 0.0 : s.value(Driver::underlying, path, k));
  return total;
}

}  // namespace cfbva
