#ifndef CFBVA_CONFIG_HPP
#define CFBVA_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string_view>
#include <vector>

#include "cfbva/analytic.hpp"
#include "cfbva/closeout.hpp"
#include "cfbva/collateral.hpp"
#include "cfbva/deal.hpp"
#include "cfbva/funding.hpp"
#include "cfbva/market.hpp"

namespace cfbva {

struct GridSettings {
  double maturity = 1.0;
  std::size_t steps = 52;
  std::size_t margining_stride = 1;
  std::size_t funding_stride = 1;
  // Explicit grid; when `times` is non-empty the uniform fields are ignored.
  std::vector<double> times;
  std::vector<double> margining_times;
  std::vector<double> funding_times;

  bool uniform() const { return times.empty(); }
  SimulationGrid build() const;
  SimulationGrid build_with_steps(std::size_t n) const;
};

enum class RunMode { price, verify, converge };

struct LadderRung {
  std::size_t paths;
  std::size_t steps;
};

struct ExportSettings {
  bool ledger = false;
  bool funding = false;
  bool outcomes = false;
  bool diagnostics = true;
  bool scenarios = false;
  std::size_t max_paths = 1000;  // rows of per-path exports
};

struct RunSettings {
  RunMode mode = RunMode::price;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int degree = 2;
  std::vector<Driver> regression_state;
  std::size_t paths_per_basis = 10;
  std::size_t collateral_sweeps = 2;
  double tolerance_sigmas = 3.0;
  std::vector<LadderRung> ladder;
  ExportSettings exports;
};

struct JobConfig {
  Deal deal;
  CsaTerms csa;
  LiquidityPolicy liquidity;
  CloseoutConvention closeout;
  DriverConfig drivers;
  GridSettings grid;
  RunSettings run;
  std::optional<CcpInputs> ccp;

  void validate() const;
};

JobConfig parse_config(const nlohmann::json& document);
JobConfig load_config(const std::filesystem::path& file);
// Normalized form with every default spelled out; parse_config(to_json(c)) == c.
nlohmann::json to_json(const JobConfig& config);

// "PATHSxSTEPS,PATHSxSTEPS,..."
std::vector<LadderRung> parse_ladder(std::string_view spec);

std::string_view to_string(RunMode mode);
std::string_view to_string(CloseoutKind kind);

}  // namespace cfbva

#endif
