#include "app.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace tradegrowth::cli {

namespace {

constexpr const char* kLogEnv = "TRADEGROWTH_LOG_LEVEL";

void setup_logging() {
  auto logger = spdlog::get("tradegrowth");
  if (!logger) logger = spdlog::stderr_color_st("tradegrowth");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv(kLogEnv)) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honor names it really knows.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

struct Flags {
  std::string config;
  std::string out;
  std::optional<double> tol;
  std::optional<long> max_iter;
  std::optional<long> seed;
  std::string format;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "scenario JSON file")->required();
  sub->add_option("--out", f.out, "output directory (default: config output.dir, else out/<name>)");
  sub->add_option("--tol", f.tol, "outer tolerance; inner and mid loops tighten with it");
  sub->add_option("--max-iter", f.max_iter, "iteration cap for every loop")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "random initial guess seed")->check(CLI::NonNegativeNumber);
  sub->add_option("--format", f.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

void apply_overrides(const Flags& f, Scenario& sc) {
  SolverConfig& cfg = sc.solver;
  if (f.tol) {
    const double floor_tol = std::numeric_limits<double>::epsilon() * 1e3;
    cfg.tol_outer = *f.tol;
    cfg.tol_mid = std::max(std::min(cfg.tol_mid, *f.tol / 10.0), floor_tol);
    cfg.tol_inner = std::max(std::min(cfg.tol_inner, *f.tol / 100.0), floor_tol);
  }
  if (f.max_iter) cfg.max_iter_inner = cfg.max_iter_mid = cfg.max_iter_outer = *f.max_iter;
  if (f.seed) cfg.seed = static_cast<std::uint64_t>(*f.seed);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError("command line: " + e.issues().front().message);
  }
  if (sc.calibration) sc.calibration->fit.solver = cfg;
}

bool is_convergence_failure(ErrorCode c) {
  return c == ErrorCode::MaxIterExceeded || c == ErrorCode::DivergenceDetected || c == ErrorCode::NotConverged ||
         c == ErrorCode::SearchFailed;
}

}  // namespace

int run(int argc, const char* const* argv) {
  setup_logging();
  CLI::App app{"Balanced-growth equilibria of a multi-country trade and growth model"};
  app.require_subcommand(1);
  Flags flags;
  using Command = int (*)(const Scenario&, const RunOptions&);
  std::vector<std::pair<CLI::App*, Command>> commands = {
      {app.add_subcommand("solve", "solve one balanced growth path"), cmd_solve},
      {app.add_subcommand("counterfactual", "compare a trade-cost shock with the baseline"), cmd_counterfactual},
      {app.add_subcommand("calibrate", "trade costs from flows and a fit of T and psi"), cmd_calibrate},
      {app.add_subcommand("sweep", "growth rate over a grid of trade costs"), cmd_sweep},
  };
  for (auto& [sub, _] : commands) add_common(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Scenario sc = load_scenario(flags.config);
    apply_overrides(flags, sc);
    RunOptions opts;
    opts.out = !flags.out.empty() ? std::filesystem::path(flags.out)
                                  : sc.out_dir.value_or(std::filesystem::path("out") / sc.name);
    opts.format = !flags.format.empty() ? (flags.format == "json" ? OutputFormat::Json : OutputFormat::Csv)
                                        : sc.format.value_or(OutputFormat::Csv);
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) {
        spdlog::info("{} {} -> {}", sub->get_name(), flags.config, opts.out.string());
        return fn(sc, opts);
      }
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return is_convergence_failure(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}

}  // namespace tradegrowth::cli
