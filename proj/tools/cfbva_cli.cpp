#include <CLI11.hpp>
#include <iostream>

#include "cfbva/errors.hpp"
#include "cfbva/job.hpp"

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericError = 3 };

int run(cfbva::RunMode mode, const std::string& path, const cfbva::JobRequest& base) {
  cfbva::JobRequest request = base;
  request.mode = mode;
  const cfbva::JobReport report = cfbva::run_job(cfbva::load_config(path), request);
  if (request.out) {
    std::cout << report.summary;
    for (const auto& p : report.written) std::cout << "wrote " << p.string() << "\n";
  } else {
    std::cout << report.text;
    std::cerr << report.summary;
  }
  return report.passed ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo valuation with collateral, funding and default costs"};
  app.require_subcommand(1);

  std::string config;
  std::string ladder;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("config", config, "Job configuration (JSON)")->required();
    cmd->add_option("--seed", seed, "Override run.seed");
    cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "Directory for the report and CSV exports");
  };
  CLI::App* price = app.add_subcommand("price", "Price the deal");
  CLI::App* verify = app.add_subcommand("verify", "Compare against the applicable analytic values");
  CLI::App* converge = app.add_subcommand("converge", "Run a ladder of path and step counts");
  common(price);
  common(verify);
  common(converge);
  converge->add_option("--ladder", ladder, "PATHSxSTEPS,PATHSxSTEPS,...");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  cfbva::JobRequest request;
  for (CLI::App* cmd : {price, verify, converge}) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--seed")) request.seed = seed;
    if (cmd->count("--threads")) request.threads = threads;
    if (cmd->count("--out")) request.out = out;
  }

  try {
    if (converge->parsed() && !ladder.empty()) request.ladder = cfbva::parse_ladder(ladder);
    const cfbva::RunMode mode = price->parsed()    ? cfbva::RunMode::price
                                : verify->parsed() ? cfbva::RunMode::verify
                                                   : cfbva::RunMode::converge;
    return run(mode, config, request);
  } catch (const cfbva::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const cfbva::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfigError;
  } catch (const cfbva::NumericDomainError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const cfbva::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
}
