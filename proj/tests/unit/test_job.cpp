#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfbva/config.hpp"
#include "cfbva/errors.hpp"
#include "cfbva/job.hpp"

using namespace cfbva;
namespace fs = std::filesystem;

namespace {

JobConfig smoke() { return load_config(fs::path(CFBVA_CONFIG_DIR) / "smoke.json"); }

JobConfig risky_swap() {
  JobConfig c = load_config(fs::path(CFBVA_CONFIG_DIR) / "swap_cva.json");
  c.run.paths = 2000;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cfbva_test_job_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

bool has_staging(const fs::path& dir) {
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind(".staging", 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("price reports are byte-identical across runs and thread counts") {
  JobRequest req;
  const auto a = run_job(risky_swap(), req);
  const auto b = run_job(risky_swap(), req);
  CHECK(a.text == b.text);
  req.threads = 4;
  const auto c = run_job(risky_swap(), req);
  // Only the echoed thread count may differ.
  CHECK(a.document["result"].dump() == c.document["result"].dump());
  CHECK(c.document["config"]["run"]["threads"] == 4);
  req.seed = 1234;
  const auto d = run_job(risky_swap(), req);
  CHECK(a.text != d.text);
  CHECK(d.document["config"]["run"]["seed"] == 1234);
}

TEST_CASE("the echoed config reruns the job exactly") {
  const auto a = run_job(risky_swap(), {});
  const JobConfig echoed = parse_config(a.document["config"]);
  const auto b = run_job(echoed, {});
  CHECK(a.text == b.text);
}

TEST_CASE("the decomposition adds up and is labelled by funding scope") {
  const auto a = run_job(risky_swap(), {});
  const auto& result = a.document["result"];
  double sum = 0.0;
  for (const auto& [name, v] : result["decomposition"].items()) sum += v.get<double>();
  CHECK(sum == doctest::Approx(result["value"].get<double>()).epsilon(1e-10));
  CHECK(result["decomposition_basis"] == "diagnostic");

  JobConfig sym = risky_swap();
  sym.liquidity.scope = LiquidityScope::macro_symmetric;
  sym.liquidity.lend = sym.liquidity.borrow;
  CHECK(run_job(sym, {}).document["result"]["decomposition_basis"] == "exact");
}

TEST_CASE("verify on the smoke config passes against the discounted flows") {
  JobRequest req;
  req.mode = RunMode::verify;
  const auto r = run_job(smoke(), req);
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].name == "risk_free");
  CHECK(r.passed);
  CHECK(r.checks[0].target == doctest::Approx(100.0 * std::exp(-0.03)).epsilon(1e-12));
}

TEST_CASE("verify without an applicable oracle fails") {
  JobRequest req;
  req.mode = RunMode::verify;
  const JobConfig c = risky_swap();
  CHECK(applicable_checks(c).empty());
  const auto r = run_job(c, req);
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].name == "applicable_oracle");
  CHECK_FALSE(r.passed);
}

TEST_CASE("converge halves the error when paths quadruple") {
  JobConfig c = risky_swap();
  JobRequest req;
  req.mode = RunMode::converge;
  req.ladder = parse_ladder("1000x24,4000x24");
  const auto r = run_job(c, req);
  const auto& ladder = r.document["ladder"];
  REQUIRE(ladder.size() == 2);
  const double ratio = ladder[0]["std_error"].get<double>() / ladder[1]["std_error"].get<double>();
  CHECK(ratio > 2.0 / 1.5);
  CHECK(ratio < 2.0 * 1.5);
  CHECK(ladder[1]["se_scaling"].get<double>() == doctest::Approx(ratio / 2.0));

  req.ladder = std::vector<LadderRung>{};
  CHECK_THROWS_AS(run_job(c, req), ConfigError);
}

TEST_CASE("outputs are staged and moved into place") {
  JobConfig c = risky_swap();
  c.run.exports.ledger = c.run.exports.funding = c.run.exports.outcomes = true;
  c.run.exports.scenarios = true;
  c.run.exports.max_paths = 5;
  const fs::path out = scratch("staged");
  JobRequest req;
  req.out = out;
  const auto r = run_job(c, req);
  CHECK(r.written.size() == 6);
  for (const char* f : {"report.json", "diagnostics.csv", "ledger.csv", "funding.csv",
                        "outcomes.csv", "scenarios.bin"})
    CHECK(fs::exists(out / f));
  CHECK(slurp(out / "report.json") == r.text);
  CHECK_FALSE(has_staging(out));

  // Ledger rows are capped at max_paths.
  std::ifstream ledger(out / "ledger.csv");
  std::string line;
  std::getline(ledger, line);
  int last = -1;
  while (std::getline(ledger, line)) last = std::stoi(line.substr(0, line.find(',')));
  CHECK(last == 4);
  fs::remove_all(out);
}

TEST_CASE("a failed commit leaves nothing behind") {
  const fs::path out = scratch("blocked");
  fs::create_directories(out / "diagnostics.csv" / "occupied");
  JobRequest req;
  req.out = out;
  CHECK_THROWS(run_job(smoke(), req));
  CHECK_FALSE(fs::exists(out / "report.json"));
  CHECK_FALSE(has_staging(out));
  fs::remove_all(out);
}
