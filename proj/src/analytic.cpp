#include "cfbva/analytic.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <map>

#include "cfbva/errors.hpp"

namespace cfbva {

namespace {

void require_fixed(const Deal& deal, const char* who) {
  deal.validate();
  if (deal.uses_underlying())
    throw UsageError(std::string(who) + ": flows on the underlying need a scenario set");
}

// Sorted breakpoints in [0, horizon] from curve knots and extra times.
std::vector<double> panels(double horizon, std::initializer_list<const Curve*> curves,
                           const std::vector<double>& extra = {}) {
  std::vector<double> pts{0.0, horizon};
  for (const Curve* c : curves)
    for (double t : c->times())
      if (t > 0.0 && t < horizon) pts.push_back(t);
  for (double t : extra)
    if (t > 0.0 && t < horizon) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double integrate(const std::function<double(double)>& f, const std::vector<double>& pts) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += gauss_kronrod<double, 61>::integrate(f, pts[i], pts[i + 1], 8, 1e-15);
  return total;
}

double mean_flows(const Deal& deal, const ScenarioSet& s,
                  const std::function<double(double)>& discount) {
  const ScheduledDeal schedule(deal, s.grid());
  double total = 0.0;
  for (std::size_t k = 1; k < s.n_times(); ++k) {
    if (!schedule.pays_at(k)) continue;
    double sum = 0.0;
    for (std::size_t p = 0; p < s.n_paths(); ++p) sum += schedule.cashflow(s, p, k);
    total += discount(s.grid().times[k]) * sum / static_cast<double>(s.n_paths());
  }
  return total;
}

}  // namespace

double analytic_perfect_collateral(const Deal& deal, const Curve& collateral_rate) {
  require_fixed(deal, "analytic_perfect_collateral");
  double v = 0.0;
  for (const auto& c : deal.cashflows)
    v += payoff(c, 0.0) * std::exp(-collateral_rate.integral(0.0, c.time));
  return v;
}

double analytic_perfect_collateral(const Deal& deal, const Curve& collateral_rate,
                                   const ScenarioSet& s) {
  return mean_flows(deal, s, [&](double t) { return std::exp(-collateral_rate.integral(0.0, t)); });
}

double analytic_foreign_collateral(const Deal& deal, const Curve& collateral_rate,
                                   const Curve& riskfree, const Curve& foreign_riskfree) {
  require_fixed(deal, "analytic_foreign_collateral");
  double v = 0.0;
  for (const auto& c : deal.cashflows)
    v += payoff(c, 0.0) * std::exp(-(collateral_rate.integral(0.0, c.time) -
                                     foreign_riskfree.integral(0.0, c.time) +
                                     riskfree.integral(0.0, c.time)));
  return v;
}

double analytic_foreign_collateral(const Deal& deal, const Curve& collateral_rate,
                                   const Curve& riskfree, const Curve& foreign_riskfree,
                                   const ScenarioSet& s) {
  return mean_flows(deal, s, [&](double t) {
    return std::exp(-(collateral_rate.integral(0.0, t) - foreign_riskfree.integral(0.0, t) +
                      riskfree.integral(0.0, t)));
  });
}

CcpValue analytic_ccp_gap_risk(const Deal& deal, const CcpInputs& in) {
  require_fixed(deal, "analytic_ccp_gap_risk");
  const double horizon = deal.maturity();
  CcpValue out{};
  out.perfect = analytic_perfect_collateral(deal, in.collateral_rate);
  const auto pts = panels(horizon, {&in.overnight, &in.liquidity_plus, &in.liquidity_minus,
                                    &in.lambda_C, &in.lambda_I, &in.jump});
  auto survival = [&](double u, const Curve& liquidity) {
    return std::exp(-(in.lambda_C.integral(0.0, u) + in.lambda_I.integral(0.0, u) +
                      liquidity.integral(0.0, u) + in.overnight.integral(0.0, u)));
  };
  out.counterparty_gap = integrate(
      [&](double u) {
        return in.lambda_C(u) * survival(u, in.liquidity_plus) * in.lgd_C *
               std::max(in.jump(u), 0.0);
      },
      pts);
  out.investor_gap = integrate(
      [&](double u) {
        return in.lambda_I(u) * survival(u, in.liquidity_minus) * in.lgd_I *
               std::min(in.jump(u), 0.0);
      },
      pts);
  out.value = out.perfect - out.counterparty_gap - out.investor_gap;
  return out;
}

double ccp_gap_closed_form(double lgd, double jump, double lambda, double other_intensity,
                           double liquidity, double overnight, double horizon) {
  const double k = lambda + other_intensity + liquidity + overnight;
  if (k == 0.0) return lgd * jump * lambda * horizon;
  return lgd * jump * lambda * (-std::expm1(-k * horizon)) / k;
}

UncollateralizedValue analytic_uncollateralized_fva(const Deal& deal,
                                                    const UncollateralizedInputs& in) {
  require_fixed(deal, "analytic_uncollateralized_fva");
  // Aggregate flows by date, then W at the left end of each segment.
  std::map<double, double> flows;
  for (const auto& c : deal.cashflows) flows[c.time] += payoff(c, 0.0);
  std::vector<double> times{0.0};
  std::vector<double> amounts{0.0};
  for (const auto& [t, a] : flows) {
    times.push_back(t);
    amounts.push_back(a);
  }
  // w_end[i]: W just before times[i] (includes the flow at times[i]).
  std::vector<double> w_end(times.size(), 0.0);
  double after = 0.0;
  for (std::size_t i = times.size(); i-- > 1;) {
    w_end[i] = after + amounts[i];
    const double rate_integral = w_end[i] < 0.0 ? in.f_minus.integral(times[i - 1], times[i])
                                                : in.f_plus.integral(times[i - 1], times[i]);
    after = w_end[i] * std::exp(-rate_integral);
  }
  auto w = [&](double u) {
    const auto it = std::upper_bound(times.begin(), times.end(), u);
    if (it == times.end()) return 0.0;
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const Curve& f = w_end[i] < 0.0 ? in.f_minus : in.f_plus;
    return w_end[i] * std::exp(-f.integral(u, times[i]));
  };
  UncollateralizedValue out{};
  out.funded = after;
  const double horizon = times.back();
  const auto pts = panels(horizon, {&in.f_plus, &in.f_minus, &in.lambda_C, &in.lambda_I}, times);
  auto survival = [&](double u, const Curve& f) {
    return std::exp(
        -(in.lambda_C.integral(0.0, u) + in.lambda_I.integral(0.0, u) + f.integral(0.0, u)));
  };
  out.cva = integrate(
      [&](double u) {
        return in.lambda_C(u) * survival(u, in.f_plus) * in.lgd_C * std::max(w(u), 0.0);
      },
      pts);
  out.dva = integrate(
      [&](double u) {
        return in.lambda_I(u) * survival(u, in.f_minus) * in.lgd_I * std::min(w(u), 0.0);
      },
      pts);
  out.value = out.funded - out.cva - out.dva;
  return out;
}

}  // namespace cfbva
