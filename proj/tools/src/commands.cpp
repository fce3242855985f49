#include "commands.hpp"

#include <cmath>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "io.hpp"
#include "tradegrowth/analysis.hpp"
#include "tradegrowth/gravity.hpp"

namespace tradegrowth::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string label(const ValidatedParams& p, std::size_t i) { return p.labels()[i]; }

json labels_json(const ValidatedParams& p, const std::vector<std::size_t>& idx) {
  json out = json::array();
  for (std::size_t i : idx) out.push_back(label(p, i));
  return out;
}

json solver_json(const SolverConfig& cfg) {
  json j = {{"tol_inner", json_number(cfg.tol_inner)},
            {"tol_mid", json_number(cfg.tol_mid)},
            {"tol_outer", json_number(cfg.tol_outer)},
            {"max_iter_inner", cfg.max_iter_inner},
            {"max_iter_mid", cfg.max_iter_mid},
            {"max_iter_outer", cfg.max_iter_outer},
            {"damping_inner", json_number(cfg.damping_inner)},
            {"damping_mid", json_number(cfg.damping_mid)},
            {"damping_outer", json_number(cfg.damping_outer)},
            {"method", cfg.outer_method == OuterMethod::PseudoTransient ? "pseudo-transient" : "damped"},
            {"anderson_depth", cfg.anderson_depth},
            {"measure_floor", json_number(cfg.measure_floor)}};
  j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  return j;
}

json trace_json(const SolveTrace& t) {
  return {{"outer", t.outer_iterations},
          {"mid", t.mid_iterations},
          {"inner", t.inner_iterations},
          {"mid_solves", t.mid_solves},
          {"oscillation", t.oscillation}};
}

Table trace_table(const SolveTrace& t) {
  Table tab({"iteration", "outer_delta"});
  for (std::size_t i = 0; i < t.outer_deltas.size(); ++i) tab.add_row({static_cast<long>(i), t.outer_deltas[i]});
  return tab;
}

Table countries_table(const ValidatedParams& p, const Equilibrium& eq) {
  const Vector R = real_profit_per_variety(p, eq);
  Table t({"country", "L", "T", "w", "P", "PM", "M", "R", "g", "corner"});
  for (Eigen::Index s = 0; s < p.n(); ++s) {
    const auto i = static_cast<std::size_t>(s);
    const bool corner = std::find(eq.corner.begin(), eq.corner.end(), i) != eq.corner.end();
    t.add_row({label(p, i), p.L()[s], p.T()[s], eq.w[s], eq.P[s], eq.PM[s], eq.M[s], R[s],
               p.psi() * R[s] - p.rho(), corner});
  }
  return t;
}

Table growth_table(const ValidatedParams& p, const GrowthDecomposition& gd) {
  Table t({"country", "g", "return_per_variety", "ek_factor", "domestic_size", "romer_domestic", "romer_global",
           "printed_labor_term", "printed_global_term", "printed_total", "corner"});
  for (std::size_t i = 0; i < gd.countries.size(); ++i) {
    const CountryGrowth& c = gd.countries[i];
    t.add_row({label(p, i), c.g, c.return_per_variety, c.ek_factor, c.domestic_size, c.romer_domestic,
               c.romer_global, c.printed_labor_term, c.printed_global_term, c.printed_total, c.corner});
  }
  return t;
}

json residuals_json(const Residuals& r) {
  return {{"inner", json_number(r.inner)},
          {"mid", json_number(r.mid)},
          {"outer", json_number(r.outer)},
          {"goods_market", json_number(r.goods_market)},
          {"trade_balance", json_number(r.trade_balance)}};
}

json warnings_json(const ValidatedParams& p, const Scenario& sc) {
  json w = json::array();
  for (const std::string& s : p.warnings()) w.push_back(s);
  for (const auto& [s, d] : sc.tau_clamped) {
    w.push_back("Head-Ries ratio above one for " + label(p, s) + "-" + label(p, d) + ", tau set to 1");
  }
  return w;
}

void log_warnings(const json& warnings) {
  for (const auto& w : warnings) spdlog::warn("{}", w.get<std::string>());
}

// Tables for one converged equilibrium, plus the summary fields they share.
json write_equilibrium(const fs::path& dir, const ValidatedParams& p, const SolveResult& r, OutputFormat fmt) {
  const GrowthDecomposition gd = growth_rate(p, r.eq);
  write_table(dir, "countries", countries_table(p, r.eq), fmt);
  write_table(dir, "lambda_F", share_table(r.eq.shares.lambdaF, p.labels()), fmt);
  write_table(dir, "lambda_M", share_table(r.eq.shares.lambdaM, p.labels()), fmt);
  write_table(dir, "tau", matrix_table(p.tau(), p.labels()), fmt);
  write_table(dir, "flows", matrix_table(final_goods_flows(p, r.eq).flows, p.labels()), fmt);
  write_table(dir, "growth", growth_table(p, gd), fmt);
  write_table(dir, "trace", trace_table(r.trace), fmt);
  spdlog::info("converged: g = {:.12g}, {} outer iterations, outer residual {:.3g}", r.eq.g,
               r.trace.outer_iterations, r.eq.residuals.outer);
  return {{"converged", true},
          {"g", json_number(r.eq.g)},
          {"R", json_number(r.eq.R)},
          {"dispersion", json_number(gd.dispersion)},
          {"corners", labels_json(p, r.eq.corner)},
          {"iterations", trace_json(r.trace)},
          {"residuals", residuals_json(r.eq.residuals)}};
}

json write_failure(const fs::path& dir, const ValidatedParams& p, const SolverError& e, OutputFormat fmt) {
  spdlog::error("{}", e.what());
  write_table(dir, "trace", trace_table(e.trace()), fmt);
  json s = {{"converged", false},
            {"error", {{"code", to_string(e.code())}, {"message", e.issues().front().message}}},
            {"iterations", trace_json(e.trace())}};
  if (e.partial()) {
    write_table(dir, "countries", countries_table(p, *e.partial()), fmt);
    s["residuals"] = residuals_json(e.partial()->residuals);
  }
  return s;
}

json base_summary(const char* command, const Scenario& sc, const ValidatedParams& p) {
  json s = {{"command", command}, {"scenario", sc.name}, {"countries", p.labels()}, {"solver", solver_json(sc.solver)}};
  s["warnings"] = warnings_json(p, sc);
  log_warnings(s["warnings"]);
  return s;
}

ValidatedParams with_tau(const ModelParams& base, const Matrix& tau) {
  ModelParams m = base;
  m.tau = tau;
  return validate_params(m);
}

}  // namespace

int cmd_solve(const Scenario& sc, const RunOptions& opts) {
  const ValidatedParams p = validate_params(sc.params);
  json summary = base_summary("solve", sc, p);
  int code = 0;
  try {
    const SolveResult r = solve_bgp(p, sc.solver);
    summary.update(write_equilibrium(opts.out, p, r, opts.format));
  } catch (const SolverError& e) {
    summary.update(write_failure(opts.out, p, e, opts.format));
    code = 3;
  }
  write_json(opts.out / "summary.json", summary);
  return code;
}

int cmd_counterfactual(const Scenario& sc, const RunOptions& opts) {
  if (!sc.shock_tau) throw ConfigError("config.shock: missing required field for counterfactual");
  const ValidatedParams base = validate_params(sc.params);
  const ValidatedParams shocked = with_tau(sc.params, *sc.shock_tau);
  json summary = base_summary("counterfactual", sc, base);

  SolveResult r0;
  SolveResult r1;
  try {
    r0 = solve_bgp(base, sc.solver);
    summary["baseline"] = write_equilibrium(opts.out / "baseline", base, r0, opts.format);
  } catch (const SolverError& e) {
    summary["baseline"] = write_failure(opts.out / "baseline", base, e, opts.format);
    write_json(opts.out / "summary.json", summary);
    return 3;
  }
  try {
    r1 = solve_bgp(shocked, sc.solver);
    summary["counterfactual"] = write_equilibrium(opts.out / "counterfactual", shocked, r1, opts.format);
  } catch (const SolverError& e) {
    summary["counterfactual"] = write_failure(opts.out / "counterfactual", shocked, e, opts.format);
    write_json(opts.out / "summary.json", summary);
    return 3;
  }

  const WelfareReport rep = welfare_decomposition(base, r0.eq, shocked, r1.eq);
  const std::vector<StaticSplit> split = static_welfare_split(base, r0.eq, shocked, r1.eq);
  Table t({"country", "transitional", "static", "static_ek", "static_romer", "static_romer_printed", "dynamic",
           "total", "dynamic_share", "ek_share_of_static", "log_M_hat"});
  json per_country = json::array();
  for (std::size_t i = 0; i < rep.countries.size(); ++i) {
    const CountryWelfare& c = rep.countries[i];
    const json dyn_share = c.dynamic_share ? json_number(*c.dynamic_share) : json(nullptr);
    const json ek_share =
        std::abs(c.static_total) > 1e-12 ? json_number(c.static_ek / c.static_total) : json(nullptr);
    t.add_row({c.label, c.transitional, c.static_total, c.static_ek, c.static_romer, split[i].romer_printed,
               c.dynamic, c.total, dyn_share, ek_share, c.log_M_hat});
    per_country.push_back({{"country", c.label}, {"dynamic_share", dyn_share}, {"ek_share_of_static", ek_share}});
  }
  write_table(opts.out, "welfare", t, opts.format);
  write_table(opts.out, "tau_change", matrix_table(shocked.tau().cwiseQuotient(base.tau()), base.labels()),
              opts.format);
  summary["g_base"] = json_number(rep.g_base);
  summary["g_new"] = json_number(rep.g_new);
  summary["delta_g_pp"] = json_number(100.0 * (rep.g_new - rep.g_base));
  summary["welfare"] = per_country;
  spdlog::info("g moves from {:.12g} to {:.12g} ({:+.6f} pp)", rep.g_base, rep.g_new,
               100.0 * (rep.g_new - rep.g_base));
  write_json(opts.out / "summary.json", summary);
  return 0;
}

int cmd_calibrate(const Scenario& sc, const RunOptions& opts) {
  if (!sc.calibration) throw ConfigError("config.calibration: missing required field for calibrate");
  const CalibrationSpec& c = *sc.calibration;
  const ValidatedParams p = validate_params(sc.params);
  json summary = {{"command", "calibrate"}, {"scenario", sc.name}, {"countries", p.labels()}};

  const HeadRiesResult hr = head_ries_costs(c.flows, p.theta(), p.alpha(), c.convention);
  write_table(opts.out, "tau", matrix_table(hr.tau, p.labels()), opts.format);
  json clamped = json::array();
  for (const auto& [s, d] : hr.clamped) {
    spdlog::warn("Head-Ries ratio above one for {}-{}, tau set to 1", label(p, s), label(p, d));
    clamped.push_back({label(p, s), label(p, d)});
  }
  summary["convention"] = c.convention == HeadRiesConvention::Printed ? "printed" : "model-consistent";
  summary["clamped_pairs"] = clamped;
  if (c.flows_after) {
    const Matrix change = tau_change_matrix(c.flows, *c.flows_after, p.theta(), p.alpha(), c.convention);
    write_table(opts.out, "tau_change", matrix_table(change, p.labels()), opts.format);
  }

  if (c.targets) {
    ModelParams partial = sc.params;
    partial.tau = hr.tau;
    const FitResult fit = fit_free_params(partial, *c.targets, c.fit);
    Table t({"country", "T", "target_wage_share", "model_wage_share", "residual"});
    const Vector target = c.targets->wages / c.targets->wages.sum();
    for (Eigen::Index s = 0; s < p.n(); ++s) {
      t.add_row({label(p, static_cast<std::size_t>(s)), fit.T[s], target[s], target[s] + fit.wage_residuals[s],
                 fit.wage_residuals[s]});
    }
    write_table(opts.out, "fit", t, opts.format);
    summary["fit"] = {{"psi", json_number(fit.psi)},
                      {"objective", json_number(fit.objective)},
                      {"growth_residual", json_number(fit.growth_residual)},
                      {"sweeps", fit.sweeps_run},
                      {"solves", fit.solves}};
    spdlog::info("fit objective {:.3g} after {} sweeps, psi = {:.12g}", fit.objective, fit.sweeps_run, fit.psi);
  }
  write_json(opts.out / "summary.json", summary);
  return 0;
}

int cmd_sweep(const Scenario& sc, const RunOptions& opts) {
  if (!sc.sweep) throw ConfigError("config.sweep: missing required field for sweep");
  const ValidatedParams p = validate_params(sc.params);
  json summary = base_summary("sweep", sc, p);
  const SweepSpec& sw = *sc.sweep;

  std::vector<std::string> header = {sw.set_mode ? "tau" : "multiplier", "converged", "g", "R", "dispersion",
                                     "outer_iterations", "error"};
  for (const std::string& c : p.labels()) {
    for (const char* col : {"M_", "g_", "romer_domestic_", "romer_global_"}) header.push_back(col + c);
  }
  Table t(header);
  long failures = 0;
  for (double x : sw.values) {
    std::vector<json> row = {x};
    Matrix tau = sw.set_mode ? Matrix::Constant(p.n(), p.n(), x) : Matrix(p.tau() * x);
    tau.diagonal().setOnes();
    try {
      const ValidatedParams q = with_tau(sc.params, tau);
      const SolveResult r = solve_bgp(q, sc.solver);
      const GrowthDecomposition gd = growth_rate(q, r.eq);
      row.insert(row.end(), {true, r.eq.g, r.eq.R, gd.dispersion, r.trace.outer_iterations, nullptr});
      for (Eigen::Index s = 0; s < q.n(); ++s) {
        const CountryGrowth& c = gd.countries[static_cast<std::size_t>(s)];
        row.insert(row.end(), {r.eq.M[s], c.g, c.romer_domestic, c.romer_global});
      }
    } catch (const Error& e) {
      ++failures;
      spdlog::warn("sweep point {:.12g}: {}", x, e.what());
      row.insert(row.end(), {false, nullptr, nullptr, nullptr, nullptr, e.what()});
      for (Eigen::Index s = 0; s < 4 * p.n(); ++s) row.push_back(nullptr);
    }
    t.add_row(std::move(row));
  }
  write_table(opts.out, "sweep", t, opts.format);
  summary["points"] = sw.values.size();
  summary["failures"] = failures;
  write_json(opts.out / "summary.json", summary);
  return failures ? 3 : 0;
}

}  // namespace tradegrowth::cli
