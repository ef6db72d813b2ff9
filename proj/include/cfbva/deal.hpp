#ifndef CFBVA_DEAL_HPP
#define CFBVA_DEAL_HPP

#include <vector>

#include "cfbva/market.hpp"

namespace cfbva {

enum class PayoffKind { fixed, linear, call };

// One contractual flow seen from the investor. fixed pays `amount`; linear
// pays amount * (S - strike); call pays amount * max(S - strike, 0).
struct Cashflow {
  double time = 0.0;
  PayoffKind kind = PayoffKind::fixed;
  double amount = 1.0;
  double strike = 0.0;
};

double payoff(const Cashflow& flow, double spot);

struct Deal {
  std::vector<Cashflow> cashflows;

  bool uses_underlying() const;
  double maturity() const;
  void validate() const;
};

// Deal flows mapped onto a simulation grid.
class ScheduledDeal {
 public:
  ScheduledDeal(const Deal& deal, const SimulationGrid& grid);

  // Sum of the flows paid at t_k on a path.
  double cashflow(const ScenarioSet& s, std::size_t path, std::size_t k) const;
  bool pays_at(std::size_t k) const { return !at_[k].empty(); }

 private:
  std::vector<std::vector<Cashflow>> at_;
};

}  // namespace cfbva

#endif
