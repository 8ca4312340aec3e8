#pragma once

#include "knudsenlab/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace knudsenlab {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ExperimentResult {
  std::vector<Check> checks;
  nlohmann::json summary;
  std::vector<std::string> files;  ///< written outputs, relative to the output directory
  std::string error;               ///< NumericalFailure message, empty otherwise
  bool numerical_failure = false;

  bool all_pass() const;
  /// 0 all checks pass, 1 a check failed, 3 numerical failure.
  int exit_code() const;
};

/// Runs the configured family, writes its CSV files and result.json into out_dir (created if
/// missing). Outputs depend only on (config, seed); runtime.threads changes the schedule, not
/// the numbers. Numerical failures are reported in the result rather than thrown.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// The result.json document:
/// {experiment, model, config_hash, versions, status: pass|fail|error, checks: [{name, pass,
///  value, threshold, detail}], failed_checks: [name], error, files, summary}.
nlohmann::json result_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace knudsenlab
