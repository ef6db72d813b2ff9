#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cfbva/analytic.hpp"
#include "cfbva/closeout.hpp"
#include "cfbva/config.hpp"
#include "cfbva/errors.hpp"
#include "cfbva/job.hpp"
#include "cfbva/market.hpp"

namespace py = pybind11;
using namespace cfbva;

namespace {

PayoffKind payoff_kind(const std::string& name) {
  if (name == "fixed") return PayoffKind::fixed;
  if (name == "linear") return PayoffKind::linear;
  if (name == "call") return PayoffKind::call;
  throw ConfigError("payoff type '" + name + "' is not one of fixed, linear, call");
}

Deal make_deal(const std::vector<py::dict>& flows) {
  Deal d;
  for (const auto& f : flows) {
    Cashflow c;
    c.time = f["time"].cast<double>();
    if (f.contains("type")) c.kind = payoff_kind(f["type"].cast<std::string>());
    if (f.contains("amount")) c.amount = f["amount"].cast<double>();
    if (f.contains("strike")) c.strike = f["strike"].cast<double>();
    d.cashflows.push_back(c);
  }
  d.validate();
  return d;
}

Defaulter defaulter(const std::string& name) {
  if (name == "investor") return Defaulter::investor;
  if (name == "counterparty") return Defaulter::counterparty;
  throw UsageError("defaulter must be 'investor' or 'counterparty'");
}

RunMode run_mode(const std::string& name) {
  if (name == "price") return RunMode::price;
  if (name == "verify") return RunMode::verify;
  if (name == "converge") return RunMode::converge;
  throw UsageError("mode must be price, verify or converge");
}

}  // namespace

PYBIND11_MODULE(_cfbva, m) {
  m.doc() = "Monte Carlo pricing with collateral, funding and default risk";
  m.attr("__version__") = kEngineVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericDomainError>(m, "NumericDomainError", PyExc_ArithmeticError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  py::class_<Curve>(m, "Curve")
      .def(py::init<double>(), py::arg("flat"))
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("times"),
           py::arg("values"))
      .def("__call__", &Curve::operator(), py::arg("t"))
      .def("integral", &Curve::integral, py::arg("a"), py::arg("b"))
      .def_property_readonly("times", &Curve::times)
      .def_property_readonly("values", &Curve::values);
  py::implicitly_convertible<double, Curve>();

  m.def("simple_zcb", &simple_zcb, py::arg("rate"), py::arg("t"), py::arg("T"));

  m.def(
      "perfect_collateral",
      [](const std::vector<py::dict>& flows, const Curve& rate) {
        return analytic_perfect_collateral(make_deal(flows), rate);
      },
      py::arg("flows"), py::arg("collateral_rate"));
  m.def(
      "foreign_collateral",
      [](const std::vector<py::dict>& flows, const Curve& c, const Curve& r, const Curve& re) {
        return analytic_foreign_collateral(make_deal(flows), c, r, re);
      },
      py::arg("flows"), py::arg("collateral_rate"), py::arg("r"), py::arg("r_foreign"));
  m.def(
      "uncollateralized_fva",
      [](const std::vector<py::dict>& flows, const Curve& f_plus, const Curve& f_minus,
         const Curve& lambda_C, const Curve& lambda_I, double lgd_C, double lgd_I) {
        const auto v = analytic_uncollateralized_fva(
            make_deal(flows), {f_plus, f_minus, lambda_C, lambda_I, lgd_C, lgd_I});
        return py::dict(py::arg("value") = v.value, py::arg("funded") = v.funded,
                        py::arg("cva") = v.cva, py::arg("dva") = v.dva);
      },
      py::arg("flows"), py::arg("f_plus"), py::arg("f_minus"), py::arg("lambda_C"),
      py::arg("lambda_I"), py::arg("lgd_C"), py::arg("lgd_I"));
  m.def(
      "ccp_gap_risk",
      [](const std::vector<py::dict>& flows, const Curve& collateral_rate, const Curve& overnight,
         const Curve& l_plus, const Curve& l_minus, const Curve& lambda_C, const Curve& lambda_I,
         double lgd_C, double lgd_I, const Curve& jump) {
        CcpInputs in{collateral_rate, overnight, l_plus, l_minus, lambda_C,
                     lambda_I,        lgd_C,     lgd_I,  jump};
        const auto v = analytic_ccp_gap_risk(make_deal(flows), in);
        return py::dict(py::arg("value") = v.value, py::arg("perfect") = v.perfect,
                        py::arg("counterparty_gap") = v.counterparty_gap,
                        py::arg("investor_gap") = v.investor_gap);
      },
      py::arg("flows"), py::arg("collateral_rate"), py::arg("overnight"), py::arg("l_plus"),
      py::arg("l_minus"), py::arg("lambda_C"), py::arg("lambda_I"), py::arg("lgd_C"),
      py::arg("lgd_I"), py::arg("jump"));

  m.def(
      "on_default_theta",
      [](double epsilon, double collateral, double R_I, double R_C, double R_prime_I,
         double R_prime_C, const std::string& who) {
        const auto t = on_default_theta(epsilon, collateral,
                                        Recoveries{R_I, R_C, R_prime_I, R_prime_C}, defaulter(who));
        return py::dict(py::arg("theta") = t.theta, py::arg("closeout") = t.closeout,
                        py::arg("cva") = t.cva, py::arg("dva") = t.dva,
                        py::arg("rehypothecation") = t.rehypothecation);
      },
      py::arg("epsilon"), py::arg("collateral"), py::arg("R_I"), py::arg("R_C"),
      py::arg("R_prime_I"), py::arg("R_prime_C"), py::arg("defaulter"));

  m.def(
      "normalize_config",
      [](const std::string& text) {
        return to_json(parse_config(nlohmann::json::parse(text))).dump();
      },
      py::arg("text"), "Parse and validate a config; returns the normalized JSON text.");

  m.def(
      "run_job",
      [](const std::string& text, const std::string& mode, std::optional<std::uint64_t> seed,
         std::optional<unsigned> threads, std::optional<std::string> ladder,
         std::optional<std::filesystem::path> out) {
        JobConfig config = parse_config(nlohmann::json::parse(text));
        JobRequest req;
        req.mode = run_mode(mode);
        req.seed = seed;
        req.threads = threads;
        if (ladder) req.ladder = parse_ladder(*ladder);
        req.out = out;
        JobReport r;
        {
          py::gil_scoped_release release;
          r = run_job(std::move(config), req);
        }
        std::vector<std::string> written;
        for (const auto& p : r.written) written.push_back(p.string());
        return py::dict(py::arg("report") = r.text, py::arg("summary") = r.summary,
                        py::arg("passed") = r.passed, py::arg("written") = written);
      },
      py::arg("text"), py::arg("mode") = "price", py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("ladder") = py::none(),
      py::arg("out") = py::none());
}
