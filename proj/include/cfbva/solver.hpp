#ifndef CFBVA_SOLVER_HPP
#define CFBVA_SOLVER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cfbva/closeout.hpp"
#include "cfbva/collateral.hpp"
#include "cfbva/deal.hpp"
#include "cfbva/funding.hpp"
#include "cfbva/market.hpp"
#include "cfbva/regression.hpp"

namespace cfbva {

enum Component : std::size_t {
  kCashFlows,
  kCloseout,
  kMargining,
  kFunding,
  kCva,
  kDva,
  kRehypothecation,
  kComponentCount
};
std::string_view component_name(std::size_t c);

struct Decomposition {
  std::array<double, kComponentCount> values{};
  double total() const;
  double operator[](std::size_t c) const { return values[c]; }
};

struct PricingProblem {
  const ScenarioSet& scenario;
  const Deal& deal;
  const CsaTerms& csa;
  const LiquidityPolicy& liquidity;
  const CloseoutConvention& closeout;
  RegressionSpec regression;
};

struct PricingOptions {
  // Passes of the collateral mark-to-market estimator. The first solves the
  // margin rule locally; later ones reuse the previous ledger.
  std::size_t collateral_sweeps = 2;
  // Explicit hedge positions per funding date (funding-date major). Without
  // it the hedge is removed by the change of measure.
  const std::vector<double>* hedge = nullptr;
  bool keep_funding_ledger = false;
  bool keep_outcomes = false;
  unsigned threads = 1;
};

struct StepDiagnostics {
  std::size_t index = 0;
  double time = 0.0;
  RegressionDiagnostics regression;
};

struct PricingResult {
  double value = 0.0;
  double std_error = 0.0;
  double pathwise_mean = 0.0;
  Decomposition decomposition;
  std::vector<StepDiagnostics> steps;
  std::size_t n_paths = 0;
  std::size_t n_times = 0;
  std::size_t investor_defaults = 0;
  std::size_t counterparty_defaults = 0;
  std::size_t resolution_mismatches = 0;
  std::size_t continuation_fallbacks = 0;
};

// Pi_bar over one interval, by component, discounted to its start.
struct IntervalPayoff {
  std::array<double, kComponentCount> parts{};
  double total() const;
};

// Everything the valuations share: the scheduled deal, the collateral ledger
// and the close-out values at tau, each built from default-free regressions.
class PricingContext {
 public:
  PricingContext(const PricingProblem& problem, const PricingOptions& options = {});

  const PricingProblem& problem() const { return problem_; }
  const ScheduledDeal& schedule() const { return schedule_; }
  const CollateralModel& collateral_model() const { return model_; }
  const CollateralLedger& ledger() const { return ledger_; }
  const ContinuationValues& closeout_values() const { return closeout_; }
  std::size_t continuation_fallbacks() const { return fallbacks_; }

  // Regression state at master index k (stochastic drivers only).
  std::vector<std::span<const double>> state(std::size_t k) const;

  // Pi_bar_T(t_{k0}, t_{k1}) on a path, zero unless the path survives t_{k0}.
  IntervalPayoff interval_payoff(std::size_t path, std::size_t k0, std::size_t k1) const;
  // Pi_bar(0, T; C) in one pass, independent of any interval split.
  IntervalPayoff total_payoff(std::size_t path) const;
  // Collateral account at master index k before any default.
  double collateral_balance(std::size_t path, std::size_t k) const;
  // Settlement details of a path defaulting before maturity.
  OnDefaultOutcome default_outcome(std::size_t path) const;

 private:
  void risk_free_sweep(std::vector<double>& eps);
  void collateral_sweeps(std::size_t sweeps, std::vector<double>& eps);
  void funded_sweep(std::vector<double>& eps);
  void fit_all_paths(std::size_t k, std::span<double> target);

  PricingProblem problem_;
  ScheduledDeal schedule_;
  CollateralModel model_;
  CollateralLedger ledger_;
  ContinuationValues closeout_;
  std::vector<Driver> state_drivers_;
  std::vector<std::uint32_t> all_paths_;
  std::vector<std::size_t> default_bracket_;  // k with t_k <= tau < t_{k+1}, tau < T
  std::size_t fallbacks_ = 0;
};

struct PricingArtifacts {
  std::optional<FundingLedger> funding;
  std::vector<OnDefaultOutcome> outcomes;
  std::vector<double> pathwise;  // discounted Pi_bar + funding cost per path
};

struct PricingRun {
  PricingResult result;
  PricingArtifacts artifacts;
};

PricingRun backward_cfbva_run(const PricingContext& context, const PricingOptions& options = {});
PricingResult backward_cfbva_price(const PricingProblem& problem,
                                   const PricingOptions& options = {});

// Regression-free value for symmetric funding: interval payoffs compounded
// with the funding-to-risk-free bond ratios along each path.
PricingResult forward_pathwise_oracle(const PricingContext& context,
                                      const PricingOptions& options = {});

// Default regression state: the stochastic drivers among S, r, lambda_I, lambda_C, fx.
std::vector<Driver> default_state_drivers(const ScenarioSet& s);

}  // namespace cfbva

#endif
