#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tradegrowth/calibration.hpp"
#include "tradegrowth/model.hpp"
#include "tradegrowth/solver.hpp"

namespace tradegrowth::cli {

// Anything wrong with a config file or the data it points to. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

struct SweepSpec {
  std::vector<double> values;
  bool set_mode = false;  // values are the off-diagonal tau itself, not multipliers
};

struct CalibrationSpec {
  FlowTable flows;
  std::optional<FlowTable> flows_after;
  HeadRiesConvention convention = HeadRiesConvention::ModelConsistent;
  std::optional<CalibrationTargets> targets;
  FitConfig fit;
};

struct Scenario {
  std::string name;
  ModelParams params;
  std::vector<std::pair<std::size_t, std::size_t>> tau_clamped;
  SolverConfig solver;
  std::optional<Matrix> shock_tau;
  std::optional<SweepSpec> sweep;
  std::optional<CalibrationSpec> calibration;
  std::optional<std::filesystem::path> out_dir;
  std::optional<OutputFormat> format;
};

// Reads and validates a JSON scenario. Relative data paths resolve against
// the directory of the config file. Throws ConfigError.
Scenario load_scenario(const std::filesystem::path& config);
Scenario parse_scenario(const nlohmann::json& root, const std::filesystem::path& base_dir);

// Flow CSV with header source,dest,value and one row per ordered pair.
FlowTable read_flow_csv(const std::filesystem::path& path, const std::vector<std::string>& labels);
void write_flow_csv(const std::filesystem::path& path, const FlowTable& flows);

HeadRiesConvention parse_convention(const std::string& name);

}  // namespace tradegrowth::cli
