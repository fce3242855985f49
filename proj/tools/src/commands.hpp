#pragma once

#include <filesystem>

#include "scenario.hpp"

namespace tradegrowth::cli {

struct RunOptions {
  std::filesystem::path out;
  OutputFormat format = OutputFormat::Csv;
};

// Each command writes its tables and summary.json under opts.out and returns
// the process exit code: 0 on success, 3 when a solve does not converge.
// Config and data problems surface as ConfigError or tradegrowth::Error.
int cmd_solve(const Scenario& sc, const RunOptions& opts);
int cmd_counterfactual(const Scenario& sc, const RunOptions& opts);
int cmd_calibrate(const Scenario& sc, const RunOptions& opts);
int cmd_sweep(const Scenario& sc, const RunOptions& opts);

}  // namespace tradegrowth::cli
