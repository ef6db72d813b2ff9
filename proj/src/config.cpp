#include "cfbva/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <string>

#include "cfbva/errors.hpp"

namespace cfbva {

using nlohmann::json;

namespace {

// Object reader that tracks consumed keys so leftovers can be reported.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  std::string where(std::string_view key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + ": required");
    return j_.at(key);
  }
  Node child(const std::string& key) const { return Node(raw(key), where(key)); }
  void mark(const std::string& key) const { used_.insert(key); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    used_.insert(key);
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where(key) + ": required");
    }
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(key) + ": must be finite");
    return d;
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    used_.insert(key);
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError(where(key) + ": expected a non-negative integer");
    return v.get<std::size_t>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    used_.insert(key);
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return j_.at(key).get<bool>();
  }
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    used_.insert(key);
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where(key) + ": required");
    }
    if (!j_.at(key).is_string()) throw ConfigError(where(key) + ": expected a string");
    return j_.at(key).get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

template <class E>
E choose(const std::string& value, const std::string& field,
         std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(field + ": '" + value + "' is not one of " + names);
}

Driver driver_named(const std::string& name, const std::string& field) {
  if (const auto d = parse_driver(name)) return *d;
  throw ConfigError(field + ": unknown driver '" + name + "'");
}

Curve parse_curve(const json& j, const std::string& field) {
  if (j.is_number()) return Curve(j.get<double>());
  Node n(j, field);
  Curve c(n.numbers("times"), n.numbers("values"));
  n.finish();
  return c;
}

json curve_json(const Curve& c) {
  if (c.times().size() == 1) return c.values().front();
  return json{{"times", c.times()}, {"values", c.values()}};
}

RateSource parse_source(const Node& parent, const std::string& key, RateSource fallback) {
  parent.mark(key);
  if (!parent.has(key)) return fallback;
  const json& j = parent.raw(key);
  const std::string field = parent.where(key);
  auto from_name = [&](const std::string& name, double spread) {
    if (name == "risk_free") return RateSource::risk_free(spread);
    return RateSource::of(driver_named(name, field), spread);
  };
  if (j.is_string()) return from_name(j.get<std::string>(), 0.0);
  Node n(j, field);
  const RateSource s = from_name(n.text("driver"), n.number("spread", 0.0));
  n.finish();
  return s;
}

json source_json(const RateSource& s) {
  return json{{"driver", s.driver ? std::string(to_string(*s.driver)) : "risk_free"},
              {"spread", s.spread}};
}

ProcessSpec parse_process(const json& j, const std::string& field) {
  if (j.is_number()) return DeterministicProcess{Curve(j.get<double>())};
  Node n(j, field);
  const std::string kind = n.text("process");
  ProcessSpec out;
  if (kind == "deterministic") {
    n.mark("times");
    n.mark("values");
    if (n.has("value"))
      out = DeterministicProcess{Curve(n.number("value"))};
    else
      out = DeterministicProcess{Curve(n.numbers("times"), n.numbers("values"))};
  } else if (kind == "vasicek") {
    VasicekProcess v;
    v.mean_reversion = n.number("mean_reversion");
    v.long_run = n.number("long_run");
    v.volatility = n.number("volatility");
    v.initial = n.number("initial");
    out = v;
  } else if (kind == "gbm") {
    GeometricBrownianProcess g;
    g.initial = n.number("initial");
    g.volatility = n.number("volatility");
    g.dividend_yield = n.number("dividend_yield", 0.0);
    g.drift = choose<DriftMode>(n.text("drift", "risk_free"), field + ".drift",
                                {{"risk_free", DriftMode::risk_free},
                                 {"funding", DriftMode::funding},
                                 {"hedging", DriftMode::hedging}});
    g.side = choose<RateSide>(n.text("drift_side", "plus"), field + ".drift_side",
                              {{"plus", RateSide::plus}, {"minus", RateSide::minus}});
    n.mark("yield_driver");
    if (n.has("yield_driver"))
      g.yield_driver = driver_named(n.text("yield_driver"), field + ".yield_driver");
    out = g;
  } else {
    throw ConfigError(field + ".process: '" + kind +
                      "' is not one of deterministic, vasicek, gbm");
  }
  n.finish();
  return out;
}

json process_json(const ProcessSpec& p) {
  if (const auto* d = std::get_if<DeterministicProcess>(&p)) {
    if (d->curve.times().size() == 1)
      return json{{"process", "deterministic"}, {"value", d->curve.values().front()}};
    return json{
        {"process", "deterministic"}, {"times", d->curve.times()}, {"values", d->curve.values()}};
  }
  if (const auto* v = std::get_if<VasicekProcess>(&p))
    return json{{"process", "vasicek"},
                {"mean_reversion", v->mean_reversion},
                {"long_run", v->long_run},
                {"volatility", v->volatility},
                {"initial", v->initial}};
  const auto& g = std::get<GeometricBrownianProcess>(p);
  json out{{"process", "gbm"},
           {"initial", g.initial},
           {"volatility", g.volatility},
           {"dividend_yield", g.dividend_yield},
           {"drift", g.drift == DriftMode::risk_free ? "risk_free"
                     : g.drift == DriftMode::funding ? "funding"
                                                     : "hedging"},
           {"drift_side", g.side == RateSide::plus ? "plus" : "minus"}};
  if (g.yield_driver) out["yield_driver"] = std::string(to_string(*g.yield_driver));
  return out;
}

CloseoutKind parse_kind(const std::string& v, const std::string& field) {
  return choose<CloseoutKind>(v, field,
                              {{"risk_free", CloseoutKind::risk_free},
                               {"collateral_value", CloseoutKind::collateral_value},
                               {"risk_free_with_funding", CloseoutKind::risk_free_with_funding}});
}

std::vector<std::size_t> indices_of(const SimulationGrid& g, const std::vector<double>& times,
                                    const char* field) {
  std::vector<std::size_t> out;
  for (double t : times) {
    try {
      out.push_back(g.index_of(t));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("model.grid.") + field + ": " + e.what());
    }
  }
  return out;
}

std::vector<Driver> parse_drivers(const Node& n, const std::string& key) {
  std::vector<Driver> out;
  n.mark(key);
  if (!n.has(key)) return out;
  const json& j = n.raw(key);
  if (!j.is_array()) throw ConfigError(n.where(key) + ": expected an array of driver names");
  for (const auto& x : j) {
    if (!x.is_string()) throw ConfigError(n.where(key) + ": expected driver names");
    out.push_back(driver_named(x.get<std::string>(), n.where(key)));
  }
  return out;
}

json driver_names(const std::vector<Driver>& ds) {
  json out = json::array();
  for (Driver d : ds) out.push_back(std::string(to_string(d)));
  return out;
}

Deal parse_deal(const Node& n) {
  Deal deal;
  const json& flows = n.raw("cashflows");
  if (!flows.is_array()) throw ConfigError(n.where("cashflows") + ": expected an array");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    Node f(flows[i], n.where("cashflows") + "[" + std::to_string(i) + "]");
    Cashflow c;
    c.time = f.number("time");
    c.kind = choose<PayoffKind>(f.text("type", "fixed"), f.where("type"),
                                {{"fixed", PayoffKind::fixed},
                                 {"linear", PayoffKind::linear},
                                 {"call", PayoffKind::call}});
    c.amount = f.number("amount", 1.0);
    c.strike = f.number("strike", 0.0);
    f.finish();
    deal.cashflows.push_back(c);
  }
  n.finish();
  return deal;
}

CsaTerms parse_csa(const Node& n) {
  CsaTerms c;
  c.alpha = n.number("alpha", 0.0);
  c.threshold = n.number("threshold", 0.0);
  c.minimum_transfer = n.number("mta", 0.0);
  c.rehypothecation = n.boolean("rehypothecation", false);
  c.recovery.investor = n.number("R_I", 0.4);
  c.recovery.counterparty = n.number("R_C", 0.4);
  c.recovery.investor_collateral = n.number("R_prime_I", 1.0);
  c.recovery.counterparty_collateral = n.number("R_prime_C", 1.0);
  c.currency = choose<CollateralCurrency>(
      n.text("currency", "domestic"), n.where("currency"),
      {{"domestic", CollateralCurrency::domestic}, {"foreign", CollateralCurrency::foreign}});
  c.accrual_plus = parse_source(n, "c_plus", RateSource::risk_free());
  c.accrual_minus = parse_source(n, "c_minus", c.accrual_plus);
  c.settlement_basis = n.number("settlement_basis", 0.0);
  n.finish();
  return c;
}

LiquidityPolicy parse_liquidity(const Node& n) {
  LiquidityPolicy l;
  l.mode = choose<FundingMode>(
      n.text("mode", "treasury"), n.where("mode"),
      {{"treasury", FundingMode::treasury}, {"direct_market", FundingMode::direct_market}});
  l.scope = choose<LiquidityScope>(n.text("scope", "macro_asymmetric"), n.where("scope"),
                                   {{"micro", LiquidityScope::micro},
                                    {"macro_asymmetric", LiquidityScope::macro_asymmetric},
                                    {"macro_symmetric", LiquidityScope::macro_symmetric}});
  l.borrow = parse_source(n, "f_plus", RateSource::risk_free());
  l.lend = parse_source(n, "f_minus", l.borrow);
  n.mark("h_plus");
  n.mark("h_minus");
  if (n.has("h_plus")) l.hedge_borrow = parse_source(n, "h_plus", l.borrow);
  if (n.has("h_minus"))
    l.hedge_lend = parse_source(n, "h_minus", l.hedge_borrow.value_or(l.lend));
  else if (l.hedge_borrow && l.scope == LiquidityScope::macro_symmetric)
    l.hedge_lend = l.hedge_borrow;
  n.mark("funder_recovery");
  if (n.has("funder_recovery")) l.funder_recovery = n.number("funder_recovery");
  n.finish();
  return l;
}

CloseoutConvention parse_closeout(const Node& n) {
  CloseoutConvention c;
  c.investor = parse_kind(n.text("kind", "risk_free"), n.where("kind"));
  c.symmetric = n.boolean("symmetric", true);
  n.mark("counterparty_kind");
  c.counterparty = n.has("counterparty_kind")
                       ? parse_kind(n.text("counterparty_kind"), n.where("counterparty_kind"))
                       : c.investor;
  if (c.symmetric && c.counterparty != c.investor)
    throw ConfigError("closeout.counterparty_kind: must equal kind when symmetric is true");
  n.finish();
  return c;
}

GridSettings parse_grid(const Node& n) {
  GridSettings g;
  n.mark("times");
  if (n.has("times")) {
    g.times = n.numbers("times");
    n.mark("margining");
    n.mark("funding");
    g.margining_times = n.has("margining") ? n.numbers("margining") : g.times;
    g.funding_times = n.has("funding") ? n.numbers("funding") : g.times;
  } else {
    g.maturity = n.number("maturity");
    g.steps = n.count("steps", 52);
    g.margining_stride = n.count("margining_stride", 1);
    g.funding_stride = n.count("funding_stride", 1);
  }
  n.finish();
  return g;
}

DriverConfig parse_model_drivers(const Node& model, GridSettings& grid) {
  DriverConfig d;
  grid = parse_grid(model.child("grid"));
  model.mark("drivers");
  if (model.has("drivers")) {
    const Node drivers = model.child("drivers");
    const json& raw = model.raw("drivers");
    for (auto it = raw.begin(); it != raw.end(); ++it) {
      const Driver driver = driver_named(it.key(), drivers.where(it.key()));
      d[driver] = parse_process(drivers.raw(it.key()), drivers.where(it.key()));
    }
    drivers.finish();
  }
  model.mark("correlation");
  if (model.has("correlation")) {
    const Node corr = model.child("correlation");
    d.correlated = parse_drivers(corr, "drivers");
    const json& m = corr.raw("matrix");
    const std::string field = corr.where("matrix");
    if (!m.is_array() || m.size() != d.correlated.size())
      throw ConfigError(field + ": expected " + std::to_string(d.correlated.size()) + " rows");
    for (const auto& row : m) {
      if (!row.is_array() || row.size() != d.correlated.size())
        throw ConfigError(field + ": rows must have one entry per driver");
      for (const auto& x : row) {
        if (!x.is_number()) throw ConfigError(field + ": expected numbers");
        d.correlation.push_back(x.get<double>());
      }
    }
    corr.finish();
  }
  d.default_correlation = model.number("default_correlation", 0.0);
  model.finish();
  return d;
}

RunSettings parse_run(const Node& n) {
  RunSettings r;
  r.mode = choose<RunMode>(
      n.text("mode", "price"), n.where("mode"),
      {{"price", RunMode::price}, {"verify", RunMode::verify}, {"converge", RunMode::converge}});
  r.paths = n.count("paths", r.paths);
  r.seed = n.count("seed", r.seed);
  r.threads = static_cast<unsigned>(n.count("threads", r.threads));
  r.degree = static_cast<int>(n.count("degree", static_cast<std::size_t>(r.degree)));
  r.regression_state = parse_drivers(n, "regression_state");
  r.paths_per_basis = n.count("paths_per_basis", r.paths_per_basis);
  r.collateral_sweeps = n.count("collateral_sweeps", r.collateral_sweeps);
  r.tolerance_sigmas = n.number("tolerance_sigmas", r.tolerance_sigmas);
  n.mark("ladder");
  if (n.has("ladder")) r.ladder = parse_ladder(n.text("ladder"));
  n.mark("export");
  if (n.has("export")) {
    const Node e = n.child("export");
    r.exports.ledger = e.boolean("ledger", r.exports.ledger);
    r.exports.funding = e.boolean("funding", r.exports.funding);
    r.exports.outcomes = e.boolean("outcomes", r.exports.outcomes);
    r.exports.diagnostics = e.boolean("diagnostics", r.exports.diagnostics);
    r.exports.scenarios = e.boolean("scenarios", r.exports.scenarios);
    r.exports.max_paths = e.count("max_paths", r.exports.max_paths);
    e.finish();
  }
  n.finish();
  return r;
}

CcpInputs parse_ccp(const Node& n) {
  CcpInputs c;
  auto curve = [&](const char* key, double fallback) {
    n.mark(key);
    return n.has(key) ? parse_curve(n.raw(key), n.where(key)) : Curve(fallback);
  };
  c.collateral_rate = curve("collateral_rate", 0.0);
  c.overnight = curve("overnight", 0.0);
  c.liquidity_plus = curve("l_plus", 0.0);
  c.liquidity_minus = curve("l_minus", 0.0);
  c.lambda_C = curve("lambda_C", 0.0);
  c.lambda_I = curve("lambda_I", 0.0);
  c.jump = curve("jump", 0.0);
  c.lgd_C = n.number("lgd_C", 1.0);
  c.lgd_I = n.number("lgd_I", 1.0);
  n.finish();
  return c;
}

json ladder_json(const std::vector<LadderRung>& ladder) {
  std::string s;
  for (const auto& r : ladder)
    s += (s.empty() ? "" : ",") + std::to_string(r.paths) + "x" + std::to_string(r.steps);
  return s;
}

// Drivers named by the deal, the rate sources and the processes must appear
// under model.drivers; only r and fx have usable defaults.
void check_declared(const json& document, const JobConfig& c) {
  std::set<Driver> declared{Driver::r, Driver::fx};
  const json& model = document.at("model");
  if (model.contains("drivers") && model.at("drivers").is_object())
    for (auto it = model.at("drivers").begin(); it != model.at("drivers").end(); ++it)
      declared.insert(*parse_driver(it.key()));
  auto need = [&](std::optional<Driver> d, const std::string& field) {
    if (d && !declared.count(*d))
      throw ConfigError(field + ": driver '" + std::string(to_string(*d)) +
                        "' is not declared in model.drivers");
  };
  if (c.deal.uses_underlying()) need(Driver::underlying, "deal.cashflows");
  need(c.csa.accrual_plus.driver, "csa.c_plus");
  need(c.csa.accrual_minus.driver, "csa.c_minus");
  need(c.liquidity.borrow.driver, "liquidity.f_plus");
  need(c.liquidity.lend.driver, "liquidity.f_minus");
  if (c.liquidity.hedge_borrow) need(c.liquidity.hedge_borrow->driver, "liquidity.h_plus");
  if (c.liquidity.hedge_lend) need(c.liquidity.hedge_lend->driver, "liquidity.h_minus");
  if (c.csa.currency == CollateralCurrency::foreign) need(Driver::r_foreign, "csa.currency");
  for (std::size_t i = 0; i < kDriverCount; ++i)
    if (const auto* g = std::get_if<GeometricBrownianProcess>(&c.drivers.process[i]))
      need(g->yield_driver, "model.drivers." + std::string(to_string(static_cast<Driver>(i))));
  for (Driver d : c.drivers.correlated) need(d, "model.correlation.drivers");
}

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::price:
      return "price";
    case RunMode::verify:
      return "verify";
    case RunMode::converge:
      return "converge";
  }
  return "price";
}

std::string_view to_string(CloseoutKind kind) {
  switch (kind) {
    case CloseoutKind::risk_free:
      return "risk_free";
    case CloseoutKind::collateral_value:
      return "collateral_value";
    case CloseoutKind::risk_free_with_funding:
      return "risk_free_with_funding";
  }
  return "risk_free";
}

SimulationGrid GridSettings::build() const {
  if (uniform()) return SimulationGrid::uniform(maturity, steps, margining_stride, funding_stride);
  SimulationGrid g;
  g.times = times;
  if (g.times.size() < 2) throw ConfigError("model.grid.times: needs at least two times");
  g.margining = indices_of(g, margining_times, "margining");
  g.funding = indices_of(g, funding_times, "funding");
  g.validate();
  return g;
}

SimulationGrid GridSettings::build_with_steps(std::size_t n) const {
  if (!uniform()) throw ConfigError("converge: ladder steps require a uniform grid");
  const double scale = static_cast<double>(n) / static_cast<double>(steps);
  auto stride = [&](std::size_t s) {
    const double scaled = std::round(static_cast<double>(s) * scale);
    return static_cast<std::size_t>(std::max(1.0, scaled));
  };
  return SimulationGrid::uniform(maturity, n, stride(margining_stride), stride(funding_stride));
}

void JobConfig::validate() const {
  deal.validate();
  csa.validate();
  liquidity.validate();
  closeout.validate(csa);
  drivers.validate();
  const SimulationGrid g = grid.build();
  g.validate();
  const ScheduledDeal schedule(deal, g);
  if (run.paths == 0) throw ConfigError("run.paths: must be positive");
  if (run.threads == 0) throw ConfigError("run.threads: must be positive");
  if (run.collateral_sweeps == 0) throw ConfigError("run.collateral_sweeps: must be positive");
  if (!(run.tolerance_sigmas > 0.0)) throw ConfigError("run.tolerance_sigmas: must be positive");
  for (const auto& r : run.ladder)
    if (r.paths == 0 || r.steps == 0) throw ConfigError("run.ladder: rungs must be positive");
}

JobConfig parse_config(const json& document) {
  const Node root(document, "");
  JobConfig c;
  c.deal = parse_deal(root.child("deal"));
  root.mark("csa");
  if (root.has("csa")) c.csa = parse_csa(root.child("csa"));
  root.mark("liquidity");
  if (root.has("liquidity")) c.liquidity = parse_liquidity(root.child("liquidity"));
  root.mark("closeout");
  if (root.has("closeout")) c.closeout = parse_closeout(root.child("closeout"));
  c.drivers = parse_model_drivers(root.child("model"), c.grid);
  root.mark("run");
  if (root.has("run")) c.run = parse_run(root.child("run"));
  root.mark("ccp");
  if (root.has("ccp")) c.ccp = parse_ccp(root.child("ccp"));
  root.finish();
  check_declared(document, c);
  c.validate();
  return c;
}

JobConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config " + file.string());
  json document;
  try {
    document = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return parse_config(document);
}

json to_json(const JobConfig& c) {
  json deal = json::array();
  for (const auto& f : c.deal.cashflows)
    deal.push_back({{"time", f.time},
                    {"type", f.kind == PayoffKind::fixed    ? "fixed"
                             : f.kind == PayoffKind::linear ? "linear"
                                                            : "call"},
                    {"amount", f.amount},
                    {"strike", f.strike}});

  json csa{{"alpha", c.csa.alpha},
           {"threshold", c.csa.threshold},
           {"mta", c.csa.minimum_transfer},
           {"rehypothecation", c.csa.rehypothecation},
           {"R_I", c.csa.recovery.investor},
           {"R_C", c.csa.recovery.counterparty},
           {"R_prime_I", c.csa.recovery.investor_collateral},
           {"R_prime_C", c.csa.recovery.counterparty_collateral},
           {"currency", c.csa.currency == CollateralCurrency::domestic ? "domestic" : "foreign"},
           {"c_plus", source_json(c.csa.accrual_plus)},
           {"c_minus", source_json(c.csa.accrual_minus)},
           {"settlement_basis", c.csa.settlement_basis}};

  json liquidity{
      {"mode", c.liquidity.mode == FundingMode::treasury ? "treasury" : "direct_market"},
      {"scope", c.liquidity.scope == LiquidityScope::micro              ? "micro"
                : c.liquidity.scope == LiquidityScope::macro_asymmetric ? "macro_asymmetric"
                                                                        : "macro_symmetric"},
      {"f_plus", source_json(c.liquidity.borrow)},
      {"f_minus", source_json(c.liquidity.lend)}};
  if (c.liquidity.hedge_borrow) liquidity["h_plus"] = source_json(*c.liquidity.hedge_borrow);
  if (c.liquidity.hedge_lend) liquidity["h_minus"] = source_json(*c.liquidity.hedge_lend);
  if (c.liquidity.funder_recovery) liquidity["funder_recovery"] = *c.liquidity.funder_recovery;

  json closeout{{"kind", std::string(to_string(c.closeout.investor))},
                {"counterparty_kind", std::string(to_string(c.closeout.counterparty))},
                {"symmetric", c.closeout.symmetric}};

  json grid;
  if (c.grid.uniform()) {
    grid = {{"maturity", c.grid.maturity},
            {"steps", c.grid.steps},
            {"margining_stride", c.grid.margining_stride},
            {"funding_stride", c.grid.funding_stride}};
  } else {
    grid = {{"times", c.grid.times},
            {"margining", c.grid.margining_times},
            {"funding", c.grid.funding_times}};
  }
  json drivers = json::object();
  for (std::size_t i = 0; i < kDriverCount; ++i)
    drivers[std::string(to_string(static_cast<Driver>(i)))] = process_json(c.drivers.process[i]);
  json model{{"grid", grid},
             {"drivers", drivers},
             {"default_correlation", c.drivers.default_correlation}};
  if (!c.drivers.correlated.empty()) {
    const std::size_t n = c.drivers.correlated.size();
    json matrix = json::array();
    for (std::size_t i = 0; i < n; ++i)
      matrix.push_back(std::vector<double>(c.drivers.correlation.begin() + i * n,
                                           c.drivers.correlation.begin() + (i + 1) * n));
    model["correlation"] = {{"drivers", driver_names(c.drivers.correlated)}, {"matrix", matrix}};
  }

  json run{{"mode", std::string(to_string(c.run.mode))},
           {"paths", c.run.paths},
           {"seed", c.run.seed},
           {"threads", c.run.threads},
           {"degree", c.run.degree},
           {"regression_state", driver_names(c.run.regression_state)},
           {"paths_per_basis", c.run.paths_per_basis},
           {"collateral_sweeps", c.run.collateral_sweeps},
           {"tolerance_sigmas", c.run.tolerance_sigmas},
           {"export",
            {{"ledger", c.run.exports.ledger},
             {"funding", c.run.exports.funding},
             {"outcomes", c.run.exports.outcomes},
             {"diagnostics", c.run.exports.diagnostics},
             {"scenarios", c.run.exports.scenarios},
             {"max_paths", c.run.exports.max_paths}}}};
  if (!c.run.ladder.empty()) run["ladder"] = ladder_json(c.run.ladder);

  json out{{"deal", {{"cashflows", deal}}},
           {"csa", csa},
           {"liquidity", liquidity},
           {"closeout", closeout},
           {"model", model},
           {"run", run}};
  if (c.ccp)
    out["ccp"] = {{"collateral_rate", curve_json(c.ccp->collateral_rate)},
                  {"overnight", curve_json(c.ccp->overnight)},
                  {"l_plus", curve_json(c.ccp->liquidity_plus)},
                  {"l_minus", curve_json(c.ccp->liquidity_minus)},
                  {"lambda_C", curve_json(c.ccp->lambda_C)},
                  {"lambda_I", curve_json(c.ccp->lambda_I)},
                  {"jump", curve_json(c.ccp->jump)},
                  {"lgd_C", c.ccp->lgd_C},
                  {"lgd_I", c.ccp->lgd_I}};
  return out;
}

std::vector<LadderRung> parse_ladder(std::string_view spec) {
  std::vector<LadderRung> out;
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    std::string_view item = spec.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    const auto x = item.find('x');
    LadderRung rung{0, 0};
    auto parse = [&](std::string_view s, std::size_t& v) {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      return r.ec == std::errc() && r.ptr == s.data() + s.size() && v > 0;
    };
    if (x == std::string_view::npos || !parse(item.substr(0, x), rung.paths) ||
        !parse(item.substr(x + 1), rung.steps))
      throw ConfigError("ladder: '" + std::string(item) + "' is not PATHSxSTEPS");
    out.push_back(rung);
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("ladder: empty specification");
  return out;
}

}  // namespace cfbva
