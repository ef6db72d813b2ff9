#ifndef CFBVA_JOB_HPP
#define CFBVA_JOB_HPP

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "cfbva/config.hpp"

namespace cfbva {

inline constexpr const char* kEngineName = "cfbva";
inline constexpr const char* kEngineVersion = "0.1.0";

// Command-line overrides applied on top of the config file.
struct JobRequest {
  RunMode mode = RunMode::price;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::vector<LadderRung>> ladder;
  std::optional<std::filesystem::path> out;
};

struct CheckResult {
  std::string name;
  double engine = 0.0;  // engine value, or the analytic value under test
  double target = 0.0;
  double std_error = 0.0;
  double tolerance = 0.0;
  double allowance = 0.0;  // compounding gap added to the tolerance
  bool passed = false;
  std::string detail;
};

struct JobReport {
  nlohmann::json document;
  std::string text;  // canonical dump of `document`
  std::string summary;
  std::vector<CheckResult> checks;
  bool passed = true;  // false iff a verify check failed
  std::vector<std::filesystem::path> written;
};

// Runs one job. With `out` set, the report and exports are staged in a
// temporary directory and moved into place only when every file is written.
JobReport run_job(JobConfig config, const JobRequest& request);

// Oracle comparisons that apply to a configuration, without running the engine.
std::vector<std::string> applicable_checks(const JobConfig& config);

}  // namespace cfbva

#endif
