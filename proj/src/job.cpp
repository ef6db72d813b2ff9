#include "cfbva/job.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "cfbva/analytic.hpp"
#include "cfbva/errors.hpp"
#include "cfbva/rates.hpp"
#include "cfbva/report.hpp"
#include "cfbva/solver.hpp"

namespace cfbva {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- curves of a config

std::optional<Curve> deterministic_curve(const DriverConfig& d, Driver driver) {
  if (const auto* p = std::get_if<DeterministicProcess>(&d[driver])) return p->curve;
  return std::nullopt;
}

Curve shifted(const Curve& c, double spread) {
  if (spread == 0.0) return c;
  std::vector<double> v = c.values();
  for (double& x : v) x += spread;
  return Curve(c.times(), std::move(v));
}

// Continuous-time curve of a rate source when it is deterministic.
std::optional<Curve> source_curve(const DriverConfig& d, const RateSource& s) {
  const auto base = deterministic_curve(d, s.driver.value_or(Driver::r));
  if (!base) return std::nullopt;
  return shifted(*base, s.spread);
}

bool is_zero(const Curve& c) {
  return std::all_of(c.values().begin(), c.values().end(), [](double v) { return v == 0.0; });
}

// ---------------------------------------------------------------- oracles

// Target of an engine comparison; the scenario set is used for flows on the underlying.
struct EngineOracle {
  std::string name;
  std::function<double(const ScenarioSet&)> target;
  // Gap between the engine's simple compounding of the collateral rate and the
  // continuous rate in the closed form; zero when the rate is zero.
  std::function<double(const ScenarioSet&)> allowance;
};

double compounding_gap(const Deal& deal, const RateSource& source, const Curve& rate,
                       const ScenarioSet& s, const std::function<double(const Deal&)>& value) {
  const auto& t = s.grid().times;
  double gap = 0.0;
  for (const auto& flow : deal.cashflows) {
    double product = 1.0;
    for (std::size_t k = 0; k + 1 < t.size() && t[k + 1] <= flow.time; ++k)
      product *= period_bond(s, source, 0, k, k + 1);
    const double ratio = product * std::exp(rate.integral(0.0, flow.time)) - 1.0;
    gap += std::abs(value(Deal{{flow}})) * std::abs(ratio);
  }
  return gap;
}

bool margins_every_step(const GridSettings& g) {
  const SimulationGrid grid = g.build();
  return grid.margining.size() == grid.times.size();
}

std::optional<EngineOracle> perfect_oracle(const JobConfig& c) {
  const CsaTerms& csa = c.csa;
  if (csa.alpha != 1.0 || csa.threshold != 0.0 || csa.minimum_transfer != 0.0) return {};
  if (csa.settlement_basis != 0.0 || !(csa.accrual_plus == csa.accrual_minus)) return {};
  if (c.closeout.investor != CloseoutKind::collateral_value) return {};
  if (!c.closeout.symmetric && c.closeout.counterparty != CloseoutKind::collateral_value) return {};
  const bool unfunded = c.liquidity.borrow == RateSource::risk_free() &&
                        c.liquidity.lend == RateSource::risk_free() &&
                        c.liquidity.mode == FundingMode::treasury;
  if (!csa.rehypothecation && !unfunded) return {};
  if (!margins_every_step(c.grid)) return {};
  const auto rate = source_curve(c.drivers, csa.accrual_plus);
  if (!rate) return {};
  const Deal& deal = c.deal;
  const bool scenario_flows = deal.uses_underlying();

  if (csa.currency == CollateralCurrency::domestic) {
    const Curve cr = *rate;
    auto value = [cr, scenario_flows](const Deal& d, const ScenarioSet& s) {
      return scenario_flows ? analytic_perfect_collateral(d, cr, s)
                            : analytic_perfect_collateral(d, cr);
    };
    const RateSource source = csa.accrual_plus;
    return EngineOracle{is_zero(cr) ? "futures" : "perfect_collateral",
                        [=](const ScenarioSet& s) { return value(deal, s); },
                        [=](const ScenarioSet& s) {
                          return compounding_gap(deal, source, cr, s,
                                                 [&](const Deal& d) { return value(d, s); });
                        }};
  }
  const auto r = deterministic_curve(c.drivers, Driver::r);
  const auto re = deterministic_curve(c.drivers, Driver::r_foreign);
  if (!r || !re) return {};
  const Curve cr = *rate;
  const Curve rd = *r;
  const Curve rf = *re;
  auto value = [=](const Deal& d, const ScenarioSet& s) {
    return scenario_flows ? analytic_foreign_collateral(d, cr, rd, rf, s)
                          : analytic_foreign_collateral(d, cr, rd, rf);
  };
  const RateSource source = csa.accrual_plus;
  return EngineOracle{"foreign_collateral", [=](const ScenarioSet& s) { return value(deal, s); },
                      [=](const ScenarioSet& s) {
                        return compounding_gap(deal, source, cr, s,
                                               [&](const Deal& d) { return value(d, s); });
                      }};
}

std::optional<EngineOracle> uncollateralized_oracle(const JobConfig& c) {
  if (c.csa.alpha != 0.0 || c.deal.uses_underlying()) return {};
  if (c.closeout.investor != CloseoutKind::risk_free_with_funding) return {};
  if (!c.closeout.symmetric && c.closeout.counterparty != CloseoutKind::risk_free_with_funding)
    return {};
  if (c.liquidity.mode != FundingMode::treasury || c.drivers.default_correlation != 0.0) return {};
  const auto fp = source_curve(c.drivers, c.liquidity.borrow);
  const auto fm = source_curve(c.drivers, c.liquidity.lend);
  const auto lc = deterministic_curve(c.drivers, Driver::lambda_C);
  const auto li = deterministic_curve(c.drivers, Driver::lambda_I);
  if (!fp || !fm || !lc || !li || !deterministic_curve(c.drivers, Driver::r)) return {};
  UncollateralizedInputs in{*fp, *fm, *lc, *li, c.csa.recovery.lgd_counterparty(),
                            c.csa.recovery.lgd_investor()};
  const Deal deal = c.deal;
  return EngineOracle{"uncollateralized", [in, deal](const ScenarioSet&) {
                        return analytic_uncollateralized_fva(deal, in).value;
                      },
                      {}};
}

std::optional<EngineOracle> risk_free_oracle(const JobConfig& c) {
  if (c.csa.alpha != 0.0 || c.deal.uses_underlying()) return {};
  const auto r = deterministic_curve(c.drivers, Driver::r);
  const auto lc = deterministic_curve(c.drivers, Driver::lambda_C);
  const auto li = deterministic_curve(c.drivers, Driver::lambda_I);
  if (!r || !lc || !li || !is_zero(*lc) || !is_zero(*li)) return {};
  if (!(c.liquidity.borrow == RateSource::risk_free()) ||
      !(c.liquidity.lend == RateSource::risk_free()) || c.liquidity.mode != FundingMode::treasury)
    return {};
  const Curve rate = *r;
  const Deal deal = c.deal;
  return EngineOracle{"risk_free", [rate, deal](const ScenarioSet&) {
                        return analytic_perfect_collateral(deal, rate);
                      },
                      {}};
}

std::vector<EngineOracle> engine_oracles(const JobConfig& c) {
  std::vector<EngineOracle> out;
  for (auto o : {perfect_oracle(c), uncollateralized_oracle(c), risk_free_oracle(c)})
    if (o) out.push_back(std::move(*o));
  return out;
}

bool ccp_flat(const CcpInputs& in) {
  for (const Curve* c : {&in.collateral_rate, &in.overnight, &in.liquidity_plus,
                         &in.liquidity_minus, &in.lambda_C, &in.lambda_I, &in.jump})
    if (!c->is_flat()) return false;
  return true;
}

CheckResult exact_check(std::string name, double value, double target, double rel) {
  CheckResult r;
  r.name = std::move(name);
  r.engine = value;
  r.target = target;
  r.tolerance = rel * std::max(1.0, std::abs(target));
  r.passed = std::abs(value - target) <= r.tolerance;
  return r;
}

std::vector<CheckResult> ccp_checks(const JobConfig& c) {
  std::vector<CheckResult> out;
  if (!c.ccp || c.deal.uses_underlying()) return out;
  const CcpInputs& in = *c.ccp;
  CcpInputs flat = in;
  flat.jump = Curve(0.0);
  const double perfect = analytic_perfect_collateral(c.deal, in.collateral_rate);
  auto zero = exact_check("ccp_zero_jump", analytic_ccp_gap_risk(c.deal, flat).value, perfect, 1e-12);
  zero.detail = "no jump reduces to the perfectly collateralized value";
  out.push_back(zero);
  if (ccp_flat(in)) {
    const CcpValue v = analytic_ccp_gap_risk(c.deal, in);
    const double T = c.deal.maturity();
    const double J = in.jump(0.0);
    const double target = ccp_gap_closed_form(in.lgd_C, std::max(J, 0.0), in.lambda_C(0.0),
                                              in.lambda_I(0.0), in.liquidity_plus(0.0),
                                              in.overnight(0.0), T) +
                          ccp_gap_closed_form(in.lgd_I, std::min(J, 0.0), in.lambda_I(0.0),
                                              in.lambda_C(0.0), in.liquidity_minus(0.0),
                                              in.overnight(0.0), T);
    auto gap = exact_check("ccp_gap_closed_form", v.counterparty_gap + v.investor_gap, target,
                           1e-10);
    gap.detail = "quadrature of the gap terms against the flat closed form";
    out.push_back(gap);
  }
  return out;
}

// ---------------------------------------------------------------- one engine run

struct Session {
  Session(const JobConfig& c, SimulationGrid g, std::size_t paths)
      : grid(std::move(g)),
        scenario(simulate_scenarios(c.drivers, grid, paths, c.run.seed, c.run.threads)),
        problem{scenario,
                c.deal,
                c.csa,
                c.liquidity,
                c.closeout,
                RegressionSpec{c.run.regression_state, c.run.degree, c.run.paths_per_basis}},
        options(make_options(c)),
        context(problem, options),
        run(backward_cfbva_run(context, options)) {}
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  static PricingOptions make_options(const JobConfig& c) {
    PricingOptions o;
    o.collateral_sweeps = c.run.collateral_sweeps;
    o.keep_funding_ledger = c.run.exports.funding;
    o.keep_outcomes = c.run.exports.outcomes;
    o.threads = c.run.threads;
    return o;
  }

  SimulationGrid grid;
  ScenarioSet scenario;
  PricingProblem problem;
  PricingOptions options;
  PricingContext context;
  PricingRun run;
};

// The component split is additive by construction, but it only attributes
// funding correctly when borrowing and lending rates coincide.
json result_json(const PricingResult& r, const ScenarioSet& s, const JobConfig& config) {
  json decomposition = json::object();
  for (std::size_t c = 0; c < kComponentCount; ++c)
    decomposition[std::string(component_name(c))] = r.decomposition[c];
  std::size_t fallbacks = 0, ridge = 0;
  double max_condition = 0.0, max_residual = 0.0;
  for (const auto& st : r.steps) {
    fallbacks += st.regression.degree_fallback;
    ridge += st.regression.ridge;
    max_condition = std::max(max_condition, st.regression.condition);
    max_residual = std::max(max_residual, st.regression.residual_rms);
  }
  json floored = json::object();
  for (std::size_t d = 0; d < kDriverCount; ++d)
    if (s.diagnostics().floored[d])
      floored[std::string(to_string(static_cast<Driver>(d)))] = s.diagnostics().floored[d];
  return json{
      {"value", r.value},
      {"std_error", r.std_error},
      {"pathwise_mean", r.pathwise_mean},
      {"decomposition", decomposition},
      {"decomposition_basis",
       config.liquidity.scope == LiquidityScope::macro_symmetric ? "exact" : "diagnostic"},
      {"defaults", {{"investor", r.investor_defaults}, {"counterparty", r.counterparty_defaults}}},
      {"diagnostics",
       {{"paths", r.n_paths},
        {"times", r.n_times},
        {"resolution_mismatches", r.resolution_mismatches},
        {"continuation_fallbacks", r.continuation_fallbacks},
        {"floored", floored},
        {"default_ties", s.diagnostics().default_ties},
        {"regression",
         {{"steps", r.steps.size()},
          {"degree_fallbacks", fallbacks},
          {"ridge_steps", ridge},
          {"max_condition", max_condition},
          {"max_residual_rms", max_residual}}}}}};
}

std::string result_summary(const PricingResult& r) {
  std::ostringstream os;
  os.precision(10);
  os << "  value              " << r.value << "  (std error " << r.std_error << ")\n";
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    std::string name(component_name(c));
    name.resize(18, ' ');
    os << "    " << name << r.decomposition[c] << "\n";
  }
  os << "  defaults           investor " << r.investor_defaults << ", counterparty "
     << r.counterparty_defaults << "\n";
  if (r.resolution_mismatches)
    os << "  funding resolution mismatches " << r.resolution_mismatches << "\n";
  if (r.continuation_fallbacks)
    os << "  regression fallbacks " << r.continuation_fallbacks << "\n";
  return os.str();
}

json check_json(const CheckResult& c) {
  return json{{"name", c.name},     {"engine", c.engine},       {"target", c.target},
              {"std_error", c.std_error}, {"tolerance", c.tolerance}, {"passed", c.passed},
              {"discretization", c.allowance},
              {"detail", c.detail}};
}

// ---------------------------------------------------------------- staged output

struct StagedFile {
  std::string name;
  std::function<void(const fs::path&)> write;
};

StagedFile text_file(std::string name, std::function<void(std::ostream&)> body) {
  return {std::move(name), [body = std::move(body)](const fs::path& p) {
            std::ofstream os(p, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write " + p.string());
            body(os);
            os.flush();
            if (!os) throw std::runtime_error("write failed: " + p.string());
          }};
}

std::vector<fs::path> commit(const fs::path& out, const std::vector<StagedFile>& files) {
  fs::create_directories(out);
  const fs::path staging = out / (".staging-" + std::to_string(::getpid()));
  fs::remove_all(staging);
  fs::create_directory(staging);
  std::vector<fs::path> written;
  try {
    for (const auto& f : files) f.write(staging / f.name);
    for (const auto& f : files) {
      fs::rename(staging / f.name, out / f.name);
      written.push_back(out / f.name);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    fs::remove_all(staging, ec);
    throw;
  }
  fs::remove_all(staging);
  return written;
}

void add_exports(const JobConfig& c, const Session& s, std::vector<StagedFile>& files) {
  const auto& ex = c.run.exports;
  const std::size_t rows = std::min(ex.max_paths, s.scenario.n_paths());
  const auto& times = s.grid.times;
  if (ex.diagnostics)
    files.push_back(text_file("diagnostics.csv", [&s](std::ostream& os) {
      CsvWriter w(os, {"index", "time", "population", "variables", "degree", "basis_size",
                       "residual_rms", "condition", "ridge", "degree_fallback"});
      for (const auto& st : s.run.result.steps) {
        const auto& d = st.regression;
        w.row({static_cast<long long>(st.index), st.time, static_cast<long long>(d.population),
               static_cast<long long>(d.variables), static_cast<long long>(d.degree),
               static_cast<long long>(d.basis_size), d.residual_rms, d.condition,
               static_cast<long long>(d.ridge), static_cast<long long>(d.degree_fallback)});
      }
    }));
  if (ex.ledger)
    files.push_back(text_file("ledger.csv", [&s, rows, &times](std::ostream& os) {
      CsvWriter w(os, {"path", "time", "posted", "held"});
      const CollateralLedger& l = s.context.ledger();
      for (std::size_t p = 0; p < rows; ++p)
        for (std::size_t m = 0; m < l.n_dates(); ++m)
          w.row({static_cast<long long>(p), times[l.dates()[m]], l.posted(m, p),
                 l.held(s.scenario, m, p)});
    }));
  if (ex.funding && s.run.artifacts.funding)
    files.push_back(text_file("funding.csv", [&s, rows, &times](std::ostream& os) {
      CsvWriter w(os, {"path", "time", "F", "H"});
      const FundingLedger& l = *s.run.artifacts.funding;
      for (std::size_t p = 0; p < rows; ++p)
        for (std::size_t j = 0; j + 1 < l.dates.size(); ++j) {
          if (!(s.scenario.tau(p) > times[l.dates[j]])) break;
          w.row({static_cast<long long>(p), times[l.dates[j]], l.F(j, p), l.H(j, p)});
        }
    }));
  if (ex.outcomes)
    files.push_back(text_file("outcomes.csv", [&s, rows](std::ostream& os) {
      CsvWriter w(os, {"path", "tau", "defaulter", "epsilon", "collateral", "theta", "closeout",
                       "cva", "dva", "rehypothecation"});
      for (const auto& o : s.run.artifacts.outcomes) {
        if (o.path >= rows) continue;
        w.row({static_cast<long long>(o.path), o.tau,
               std::string(o.defaulter == Defaulter::investor ? "investor" : "counterparty"),
               o.epsilon, o.collateral, o.theta.theta, o.theta.closeout, o.theta.cva,
               o.theta.dva, o.theta.rehypothecation});
      }
    }));
  if (ex.scenarios)
    files.push_back({"scenarios.bin", [&s](const fs::path& p) { write_scenarios(s.scenario, p); }});
}

std::string header_line(const JobConfig& c, std::size_t paths, std::size_t steps) {
  std::ostringstream os;
  os << kEngineName << " " << to_string(c.run.mode) << "  paths " << paths << "  steps "
     << steps << "  seed " << c.run.seed << "\n";
  return os.str();
}

}  // namespace

std::vector<std::string> applicable_checks(const JobConfig& config) {
  std::vector<std::string> out;
  for (const auto& o : engine_oracles(config)) out.push_back(o.name);
  for (const auto& c : ccp_checks(config)) out.push_back(c.name);
  return out;
}

JobReport run_job(JobConfig config, const JobRequest& request) {
  config.run.mode = request.mode;
  if (request.seed) config.run.seed = *request.seed;
  if (request.threads) config.run.threads = *request.threads;
  if (request.ladder) config.run.ladder = *request.ladder;
  config.validate();

  JobReport report;
  json& doc = report.document;
  doc["engine"] = {{"name", kEngineName}, {"version", kEngineVersion}};
  doc["mode"] = std::string(to_string(config.run.mode));
  doc["config"] = to_json(config);
  std::vector<StagedFile> files;
  std::unique_ptr<Session> session;

  switch (config.run.mode) {
    case RunMode::price: {
      const SimulationGrid grid = config.grid.build();
      session = std::make_unique<Session>(config, grid, config.run.paths);
      doc["result"] = result_json(session->run.result, session->scenario, config);
      report.summary = header_line(config, config.run.paths, grid.times.size() - 1) +
                       result_summary(session->run.result);
      break;
    }
    case RunMode::verify: {
      const auto oracles = engine_oracles(config);
      std::ostringstream os;
      os.precision(12);
      if (!oracles.empty()) {
        const SimulationGrid grid = config.grid.build();
        session = std::make_unique<Session>(config, grid, config.run.paths);
        const PricingResult& r = session->run.result;
        doc["result"] = result_json(r, session->scenario, config);
        os << header_line(config, config.run.paths, grid.times.size() - 1) << result_summary(r);
        for (const auto& o : oracles) {
          CheckResult c;
          c.name = o.name;
          c.engine = r.value;
          c.target = o.target(session->scenario);
          c.std_error = r.std_error;
          c.allowance = o.allowance ? o.allowance(session->scenario) : 0.0;
          c.tolerance = std::max(config.run.tolerance_sigmas * r.std_error,
                                 1e-9 * std::max(1.0, std::abs(c.target))) +
                        c.allowance;
          c.passed = std::abs(c.engine - c.target) <= c.tolerance;
          c.detail = "engine value against the analytic value";
          report.checks.push_back(c);
        }
      } else {
        os << header_line(config, config.run.paths, 0);
      }
      for (auto& c : ccp_checks(config)) report.checks.push_back(std::move(c));
      if (report.checks.empty()) {
        CheckResult none;
        none.name = "applicable_oracle";
        none.engine = none.target = kNaN;
        none.detail = "no analytic oracle applies to this configuration";
        report.checks.push_back(none);
      }
      json checks = json::array();
      for (const auto& c : report.checks) {
        checks.push_back(check_json(c));
        report.passed = report.passed && c.passed;
        os << (c.passed ? "PASS " : "FAIL ") << c.name << "  value " << c.engine << "  target "
           << c.target << "  |diff| " << std::abs(c.engine - c.target) << "  tol "
           << c.tolerance << "\n";
      }
      doc["checks"] = checks;
      report.summary = os.str();
      break;
    }
    case RunMode::converge: {
      if (config.run.ladder.empty())
        throw ConfigError("run.ladder: converge needs a ladder (e.g. --ladder 1000x26,2000x52)");
      const auto oracles = engine_oracles(config);
      std::ostringstream os;
      os.precision(10);
      os << kEngineName << " converge  seed " << config.run.seed << "\n";
      os << "  paths     steps     value             std_error         target\n";
      json ladder = json::array();
      struct Row {
        std::size_t paths, steps;
        double dt, value, se, target, scaling;
      };
      std::vector<Row> rows;
      for (const auto& rung : config.run.ladder) {
        SimulationGrid grid = config.grid.uniform() ? config.grid.build_with_steps(rung.steps)
                                                    : config.grid.build();
        if (grid.times.size() - 1 != rung.steps)
          throw ConfigError("run.ladder: explicit grids only support their own step count");
        const Session s(config, grid, rung.paths);
        const PricingResult& r = s.run.result;
        Row row{rung.paths, rung.steps, grid.maturity() / static_cast<double>(rung.steps),
                r.value,    r.std_error, kNaN, kNaN};
        if (!oracles.empty()) row.target = oracles.front().target(s.scenario);
        if (!rows.empty() && r.std_error > 0.0)
          row.scaling = rows.back().se / r.std_error *
                        std::sqrt(static_cast<double>(rows.back().paths) /
                                  static_cast<double>(rung.paths));
        rows.push_back(row);
        ladder.push_back({{"paths", row.paths},
                          {"steps", row.steps},
                          {"dt", row.dt},
                          {"value", row.value},
                          {"std_error", row.se},
                          {"target", row.target},
                          {"se_scaling", row.scaling}});
        os << "  " << row.paths << "\t" << row.steps << "\t" << row.value << "\t" << row.se
           << "\t" << row.target << "\n";
      }
      doc["ladder"] = ladder;
      if (!oracles.empty()) doc["target"] = oracles.front().name;
      files.push_back(text_file("convergence.csv", [rows](std::ostream& out) {
        CsvWriter w(out, {"paths", "steps", "dt", "value", "std_error", "target", "se_scaling"});
        for (const auto& r : rows)
          w.row({static_cast<long long>(r.paths), static_cast<long long>(r.steps), r.dt, r.value,
                 r.se, r.target, r.scaling});
      }));
      report.summary = os.str();
      break;
    }
  }

  report.text = dump_report(doc);
  if (request.out) {
    files.push_back(text_file("report.json", [&report](std::ostream& os) { os << report.text; }));
    if (session) add_exports(config, *session, files);
    report.written = commit(*request.out, files);
  }
  return report;
}

}  // namespace cfbva
