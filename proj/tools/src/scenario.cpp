#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "io.hpp"

namespace tradegrowth::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where + "." + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
  return number(require(obj, key, where), where + "." + key);
}

std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  return number(*it, where + "." + key);
}

long integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<long>();
}

std::string string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

// A per-country vector given as an array, or as one number repeated.
Vector country_vector(const json& v, std::size_t n, const std::string& where) {
  Vector out(static_cast<Eigen::Index>(n));
  if (v.is_number()) {
    out.setConstant(v.get<double>());
    return out;
  }
  if (!v.is_array()) fail(where, "expected a number or an array");
  if (v.size() != n) fail(where, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

Matrix square_matrix(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n) fail(where, "expected " + std::to_string(n) + " rows");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != n) fail(row, "expected " + std::to_string(n) + " columns");
    for (std::size_t j = 0; j < n; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          number(v[i][j], row + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<std::string> read_countries(const json& root) {
  const json& c = require(root, "countries", "config");
  std::vector<std::string> labels;
  if (!c.is_array() || c.empty()) fail("config.countries", "expected a non-empty array of names");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::string name = string(c[i], "config.countries[" + std::to_string(i) + "]");
    if (name.empty() || name.find_first_of(",\"\n") != std::string::npos) {
      fail("config.countries[" + std::to_string(i) + "]", "names must be non-empty and free of commas and quotes");
    }
    if (!seen.insert(name).second) fail("config.countries", "duplicate country " + name);
    labels.push_back(name);
  }
  return labels;
}

struct ResolvedTau {
  Matrix tau;
  std::vector<std::pair<std::size_t, std::size_t>> clamped;
};

// One of {"uniform": x}, {"matrix": [[...]]}, {"flows": "file.csv", "convention": ...}.
ResolvedTau read_tau(const json& v, const std::vector<std::string>& labels, double theta, double alpha,
                     const fs::path& base, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  const std::size_t n = labels.size();
  const int sources = static_cast<int>(v.contains("uniform")) + static_cast<int>(v.contains("matrix")) +
                      static_cast<int>(v.contains("flows"));
  if (sources != 1) fail(where, "give exactly one of uniform, matrix, flows");
  ResolvedTau r;
  if (v.contains("uniform")) {
    const double t = number(v["uniform"], where + ".uniform");
    r.tau = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), t);
    r.tau.diagonal().setOnes();
  } else if (v.contains("matrix")) {
    r.tau = square_matrix(v["matrix"], n, where + ".matrix");
  } else {
    const FlowTable ft = read_flow_csv(resolve(base, string(v["flows"], where + ".flows")), labels);
    const HeadRiesConvention conv = v.contains("convention")
                                        ? parse_convention(string(v["convention"], where + ".convention"))
                                        : HeadRiesConvention::ModelConsistent;
    HeadRiesResult hr = head_ries_costs(ft, theta, alpha, conv);
    r.tau = std::move(hr.tau);
    r.clamped = std::move(hr.clamped);
  }
  return r;
}

// Multiplier blocks: [{"from": [...], "to": [...], "factor": 0.85, "symmetric": true}, ...].
Matrix read_multipliers(const json& v, const std::vector<std::string>& labels, const std::string& where) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::map<std::string, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) index[labels[static_cast<std::size_t>(i)]] = i;
  Matrix mult = Matrix::Ones(n, n);
  if (!v.is_array()) fail(where, "expected an array of blocks");
  for (std::size_t b = 0; b < v.size(); ++b) {
    const std::string at = where + "[" + std::to_string(b) + "]";
    const double factor = require_number(v[b], "factor", at);
    const bool symmetric = v[b].value("symmetric", true);
    auto group = [&](const char* key) {
      const json& g = require(v[b], key, at);
      if (!g.is_array() || g.empty()) fail(at + "." + key, "expected a non-empty array of countries");
      std::vector<Eigen::Index> out;
      for (const auto& name : g) {
        const std::string s = string(name, at + "." + key);
        const auto it = index.find(s);
        if (it == index.end()) fail(at + "." + key, "unknown country " + s);
        out.push_back(it->second);
      }
      return out;
    };
    for (Eigen::Index s : group("from")) {
      for (Eigen::Index d : group("to")) {
        if (s == d) continue;
        mult(s, d) *= factor;
        if (symmetric) mult(d, s) *= factor;
      }
    }
  }
  return mult;
}

void read_solver(const json& v, SolverConfig& cfg) {
  const std::string at = "config.solver";
  if (!v.is_object()) fail(at, "expected an object");
  static const std::set<std::string> known = {"tol_inner",      "tol_mid",        "tol_outer",   "max_iter_inner",
                                              "max_iter_mid",   "max_iter_outer", "damping_inner", "damping_mid",
                                              "damping_outer",  "seed",           "method",      "anderson_depth",
                                              "measure_floor"};
  for (const auto& [key, _] : v.items()) {
    if (!known.count(key)) fail(at + "." + key, "unknown solver setting");
  }
  auto set = [&](const char* key, double& field) {
    if (auto x = optional_number(v, key, at)) field = *x;
  };
  auto set_long = [&](const char* key, long& field) {
    if (v.contains(key)) field = integer(v[key], at + "." + key);
  };
  set("tol_inner", cfg.tol_inner);
  set("tol_mid", cfg.tol_mid);
  set("tol_outer", cfg.tol_outer);
  set_long("max_iter_inner", cfg.max_iter_inner);
  set_long("max_iter_mid", cfg.max_iter_mid);
  set_long("max_iter_outer", cfg.max_iter_outer);
  set("damping_inner", cfg.damping_inner);
  set("damping_mid", cfg.damping_mid);
  set("damping_outer", cfg.damping_outer);
  set("measure_floor", cfg.measure_floor);
  if (v.contains("anderson_depth")) cfg.anderson_depth = static_cast<int>(integer(v["anderson_depth"], at + ".anderson_depth"));
  if (v.contains("seed")) {
    const long s = integer(v["seed"], at + ".seed");
    if (s < 0) fail(at + ".seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (v.contains("method")) {
    const std::string m = string(v["method"], at + ".method");
    if (m == "pseudo-transient") {
      cfg.outer_method = OuterMethod::PseudoTransient;
    } else if (m == "damped") {
      cfg.outer_method = OuterMethod::Damped;
    } else {
      fail(at + ".method", "expected pseudo-transient or damped");
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(at, e.issues().front().message);
  }
}

SweepSpec read_sweep(const json& v) {
  const std::string at = "config.sweep";
  if (!v.is_object()) fail(at, "expected an object");
  SweepSpec s;
  if (v.contains("values")) {
    const json& vals = v["values"];
    if (!vals.is_array() || vals.empty()) fail(at + ".values", "expected a non-empty array");
    for (std::size_t i = 0; i < vals.size(); ++i) s.values.push_back(number(vals[i], at + ".values[" + std::to_string(i) + "]"));
  } else {
    const double start = require_number(v, "start", at);
    const double stop = require_number(v, "stop", at);
    const double step = require_number(v, "step", at);
    if (!(step > 0.0) || !(stop >= start)) fail(at, "need step > 0 and stop >= start");
    // Points are start + i*step so that the grid does not drift.
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) fail(at, "grid has more than 100000 points");
    for (long i = 0; i < count; ++i) s.values.push_back(start + static_cast<double>(i) * step);
  }
  if (v.contains("mode")) {
    const std::string mode = string(v["mode"], at + ".mode");
    if (mode == "set") {
      s.set_mode = true;
    } else if (mode != "multiply") {
      fail(at + ".mode", "expected multiply or set");
    }
  }
  return s;
}

CalibrationSpec read_calibration(const json& v, const std::vector<std::string>& labels, const fs::path& base,
                                 const SolverConfig& solver) {
  const std::string at = "config.calibration";
  if (!v.is_object()) fail(at, "expected an object");
  CalibrationSpec c;
  c.flows = read_flow_csv(resolve(base, string(require(v, "flows", at), at + ".flows")), labels);
  if (v.contains("flows_after")) {
    c.flows_after = read_flow_csv(resolve(base, string(v["flows_after"], at + ".flows_after")), labels);
  }
  if (v.contains("convention")) c.convention = parse_convention(string(v["convention"], at + ".convention"));
  c.fit.solver = solver;
  if (v.contains("fit")) {
    const json& f = v["fit"];
    const std::string fat = at + ".fit";
    if (f.contains("sweeps")) c.fit.sweeps = static_cast<int>(integer(f["sweeps"], fat + ".sweeps"));
    if (f.contains("golden_iterations")) {
      c.fit.golden_iterations = static_cast<int>(integer(f["golden_iterations"], fat + ".golden_iterations"));
    }
    if (auto x = optional_number(f, "initial_half_width", fat)) c.fit.initial_half_width = *x;
    if (auto x = optional_number(f, "stop_objective", fat)) c.fit.stop_objective = *x;
    if (auto x = optional_number(f, "fail_objective", fat)) c.fit.fail_objective = *x;
  }
  if (v.contains("targets")) {
    const json& t = v["targets"];
    const std::string tat = at + ".targets";
    CalibrationTargets targets;
    targets.wages = country_vector(require(t, "wages", tat), labels.size(), tat + ".wages");
    targets.growth = require_number(t, "growth", tat);
    if (auto x = optional_number(t, "weight_wages", tat)) targets.weight_wages = *x;
    if (auto x = optional_number(t, "weight_growth", tat)) targets.weight_growth = *x;
    try {
      targets.validate(static_cast<Eigen::Index>(labels.size()));
    } catch (const Error& e) {
      fail(tat, e.issues().front().message);
    }
    c.targets = std::move(targets);
  }
  return c;
}

}  // namespace

HeadRiesConvention parse_convention(const std::string& name) {
  if (name == "model-consistent") return HeadRiesConvention::ModelConsistent;
  if (name == "printed") return HeadRiesConvention::Printed;
  throw ConfigError("unknown Head-Ries convention '" + name + "' (expected model-consistent or printed)");
}

FlowTable read_flow_csv(const fs::path& path, const std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open flow table");
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::map<std::string, Eigen::Index> index;
  for (Eigen::Index i = 0; i < n; ++i) index[labels[static_cast<std::size_t>(i)]] = i;

  std::string line;
  long line_no = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty flow table");
  ++line_no;
  if (trim(line) != "source,dest,value") throw ConfigError(where() + ": header must be source,dest,value");

  Matrix flows = Matrix::Constant(n, n, std::nan(""));
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 3) throw ConfigError(where() + ": expected 3 fields");
    const auto s = index.find(cells[0]);
    const auto d = index.find(cells[1]);
    if (s == index.end()) throw ConfigError(where() + ": unknown source country " + cells[0]);
    if (d == index.end()) throw ConfigError(where() + ": unknown destination country " + cells[1]);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(cells[2], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cells[2].size()) throw ConfigError(where() + ": value is not a number");
    if (!std::isnan(flows(s->second, d->second))) {
      throw ConfigError(where() + ": duplicate pair " + cells[0] + "->" + cells[1]);
    }
    flows(s->second, d->second) = value;
  }
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index d = 0; d < n; ++d) {
      if (std::isnan(flows(s, d))) {
        throw ConfigError(path.string() + ": missing pair " + labels[static_cast<std::size_t>(s)] + "->" +
                          labels[static_cast<std::size_t>(d)]);
      }
    }
  }
  return FlowTable{flows, labels};
}

void write_flow_csv(const fs::path& path, const FlowTable& flows) {
  write_text(path, matrix_table(flows.flows, flows.labels).to_csv());
}

Scenario parse_scenario(const json& root, const fs::path& base_dir) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  Scenario sc;
  sc.name = root.contains("name") ? string(root["name"], "config.name") : std::string("scenario");
  const std::vector<std::string> labels = read_countries(root);
  const std::size_t n = labels.size();

  const json& model = require(root, "model", "config");
  const std::string mat = "config.model";
  ModelParams& p = sc.params;
  p.labels = labels;
  p.theta = require_number(model, "theta", mat);
  p.sigma = require_number(model, "sigma", mat);
  p.alpha = require_number(model, "alpha", mat);
  p.rho = require_number(model, "rho", mat);
  p.L = country_vector(require(model, "L", mat), n, mat + ".L");

  const bool fitting = root.contains("calibration") && root["calibration"].contains("targets");
  // T and psi are outputs of a fit; elsewhere they are required inputs.
  p.psi = fitting ? optional_number(model, "psi", mat).value_or(1.0) : require_number(model, "psi", mat);
  p.T = model.contains("T") ? country_vector(model["T"], n, mat + ".T")
                            : (fitting ? Vector::Ones(static_cast<Eigen::Index>(n))
                                       : country_vector(require(model, "T", mat), n, mat + ".T"));

  if (root.contains("solver")) read_solver(root["solver"], sc.solver);
  if (root.contains("calibration")) {
    sc.calibration = read_calibration(root["calibration"], labels, base_dir, sc.solver);
  }

  if (root.contains("tau")) {
    ResolvedTau t = read_tau(root["tau"], labels, p.theta, p.alpha, base_dir, "config.tau");
    p.tau = std::move(t.tau);
    sc.tau_clamped = std::move(t.clamped);
  } else if (sc.calibration) {
    HeadRiesResult hr = head_ries_costs(sc.calibration->flows, p.theta, p.alpha, sc.calibration->convention);
    p.tau = std::move(hr.tau);
    sc.tau_clamped = std::move(hr.clamped);
  } else {
    fail("config.tau", "missing required field");
  }

  try {
    validate_params(p);
  } catch (const Error& e) {
    std::string msg;
    for (const Issue& i : e.issues()) msg += (msg.empty() ? "" : "; ") + i.message;
    throw ConfigError("config.model: " + msg);
  }

  if (root.contains("shock")) {
    const json& s = root["shock"];
    const std::string at = "config.shock";
    if (!s.is_object()) fail(at, "expected an object");
    const int kinds = static_cast<int>(s.contains("multipliers")) + static_cast<int>(s.contains("multiplier_matrix")) +
                      static_cast<int>(s.contains("tau"));
    if (kinds != 1) fail(at, "give exactly one of multipliers, multiplier_matrix, tau");
    Matrix next;
    if (s.contains("multipliers")) {
      next = p.tau.cwiseProduct(read_multipliers(s["multipliers"], labels, at + ".multipliers"));
    } else if (s.contains("multiplier_matrix")) {
      next = p.tau.cwiseProduct(square_matrix(s["multiplier_matrix"], n, at + ".multiplier_matrix"));
    } else {
      next = read_tau(s["tau"], labels, p.theta, p.alpha, base_dir, at + ".tau").tau;
    }
    ModelParams shocked = p;
    shocked.tau = next;
    try {
      validate_params(shocked);
    } catch (const Error& e) {
      std::string msg;
      for (const Issue& i : e.issues()) msg += (msg.empty() ? "" : "; ") + i.message;
      throw ConfigError(at + ": " + msg);
    }
    sc.shock_tau = std::move(next);
  }

  if (root.contains("sweep")) sc.sweep = read_sweep(root["sweep"]);

  if (root.contains("output")) {
    const json& o = root["output"];
    if (o.contains("dir")) sc.out_dir = resolve(base_dir, string(o["dir"], "config.output.dir"));
    if (o.contains("format")) {
      const std::string f = string(o["format"], "config.output.format");
      if (f == "csv") {
        sc.format = OutputFormat::Csv;
      } else if (f == "json") {
        sc.format = OutputFormat::Json;
      } else {
        fail("config.output.format", "expected csv or json");
      }
    }
  }
  return sc;
}

Scenario load_scenario(const fs::path& config) {
  std::ifstream in(config);
  if (!in) throw ConfigError(config.string() + ": cannot open config");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(config.string() + ": " + e.what());
  }
  return parse_scenario(root, config.parent_path());
}

}  // namespace tradegrowth::cli
