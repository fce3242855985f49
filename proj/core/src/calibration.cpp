#include "tradegrowth/calibration.hpp"

#include <cmath>
#include <limits>

namespace tradegrowth {

namespace {

void check_flows(const FlowTable& ft) {
  const Matrix& f = ft.flows;
  if (f.rows() != f.cols() || f.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "flow table must be a non-empty square matrix");
  }
  if (!ft.labels.empty() && static_cast<Eigen::Index>(ft.labels.size()) != f.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "flow table labels do not match its size");
  }
  const auto name = [&](Eigen::Index i) {
    return ft.labels.empty() ? "row " + std::to_string(i) : ft.labels[static_cast<std::size_t>(i)];
  };
  for (Eigen::Index s = 0; s < f.rows(); ++s) {
    for (Eigen::Index d = 0; d < f.cols(); ++d) {
      if (!std::isfinite(f(s, d))) throw Error(ErrorCode::NonFiniteValue, "flow " + name(s) + "->" + name(d));
      if (f(s, d) < 0.0) {
        throw Error(ErrorCode::NegativeFlow, "flow " + name(s) + "->" + name(d) + " is negative");
      }
    }
    if (!(f(s, s) > 0.0)) throw Error(ErrorCode::ZeroDiagonalFlow, "domestic flow of " + name(s) + " is zero");
  }
}

double head_ries_exponent(double theta, double alpha, HeadRiesConvention c) {
  if (!(theta > 0.0)) throw Error(ErrorCode::NonPositiveParam, "theta must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::NonPositiveParam, "alpha must lie in (0,1)");
  return c == HeadRiesConvention::Printed ? -1.0 / (2.0 * theta * (1.0 - alpha)) : -1.0 / (2.0 * theta);
}

}  // namespace

HeadRiesResult head_ries_costs(const FlowTable& flows, double theta, double alpha, HeadRiesConvention convention) {
  check_flows(flows);
  const double expo = head_ries_exponent(theta, alpha, convention);
  const Matrix& e = flows.flows;
  const Eigen::Index n = e.rows();
  HeadRiesResult out;
  out.tau = Matrix::Ones(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index d = s + 1; d < n; ++d) {
      // Logs keep the product of four flows of very different magnitude exact.
      const double log_ratio = std::log(e(s, d)) - std::log(e(d, d)) + std::log(e(d, s)) - std::log(e(s, s));
      double t = std::exp(expo * log_ratio);
      if (log_ratio > 0.0) {
        t = 1.0;
        out.clamped.emplace_back(static_cast<std::size_t>(s), static_cast<std::size_t>(d));
      }
      out.tau(s, d) = t;
      out.tau(d, s) = t;
    }
  }
  return out;
}

Matrix tau_change_matrix(const FlowTable& before, const FlowTable& after, double theta, double alpha,
                         HeadRiesConvention convention) {
  if (before.flows.rows() != after.flows.rows() || before.labels != after.labels) {
    throw Error(ErrorCode::CountryMismatch, "flow tables cover different countries");
  }
  const Matrix t0 = head_ries_costs(before, theta, alpha, convention).tau;
  const Matrix t1 = head_ries_costs(after, theta, alpha, convention).tau;
  return (t1.array() / t0.array() - 1.0).matrix();
}

void CalibrationTargets::validate(Eigen::Index n) const {
  if (wages.size() != n) throw Error(ErrorCode::DimensionMismatch, "wage targets need one entry per country");
  if (!((wages.array() > 0.0).all() && wages.allFinite())) {
    throw Error(ErrorCode::NonPositiveParam, "wage targets must be positive");
  }
  if (!(weight_wages >= 0.0 && weight_growth >= 0.0) || weight_wages + weight_growth <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "target weights must be nonnegative and not all zero");
  }
  if (!std::isfinite(growth)) throw Error(ErrorCode::NonFiniteValue, "growth target is not finite");
}

namespace {

struct Evaluation {
  double objective = std::numeric_limits<double>::infinity();
  double psi = 0.0;
  Vector wage_residuals;
  double growth_residual = 0.0;
  std::optional<InitialGuess> guess;
};

class Objective {
 public:
  Objective(const ModelParams& base, const CalibrationTargets& targets, const FitConfig& cfg)
      : base_(base), targets_(targets), cfg_(cfg), share_target_(targets.wages / targets.wages.sum()) {}

  Evaluation operator()(const Vector& logT, const std::optional<InitialGuess>& warm) {
    ++solves_;
    Evaluation ev;
    ModelParams mp = base_;
    mp.T = logT.array().exp().matrix();
    // psi does not move wages, prices, or measures: it only scales the return
    // to R&D into a growth rate. Any positive placeholder works for the solve.
    mp.psi = 1.0;
    try {
      const ValidatedParams p = validate_params(mp);
      const SolveResult r = warm ? solve_bgp(p, cfg_.solver, *warm) : solve_bgp(p, cfg_.solver);
      const Vector shares = r.eq.w / r.eq.w.sum();
      ev.wage_residuals = shares - share_target_;
      const double wage_obj = (shares.array() / share_target_.array() - 1.0).square().sum();
      // g = psi R - rho is linear in psi, so the growth block is minimized exactly.
      ev.psi = targets_.weight_growth > 0.0 ? (targets_.growth + base_.rho) / r.eq.R : base_psi();
      const double g = ev.psi * r.eq.R - base_.rho;
      ev.growth_residual = g - targets_.growth;
      ev.objective = targets_.weight_wages * wage_obj + targets_.weight_growth * ev.growth_residual * ev.growth_residual;
      ev.guess = InitialGuess{r.eq.w, r.eq.M, r.eq.P};
    } catch (const Error&) {
      ev.objective = std::numeric_limits<double>::infinity();
    }
    return ev;
  }

  long solves() const { return solves_; }

 private:
  double base_psi() const { return base_.psi > 0.0 ? base_.psi : 1.0; }

  const ModelParams& base_;
  const CalibrationTargets& targets_;
  const FitConfig& cfg_;
  Vector share_target_;
  long solves_ = 0;
};

}  // namespace

FitResult fit_free_params(const ModelParams& partial, const CalibrationTargets& targets, const FitConfig& cfg) {
  const Eigen::Index n = partial.L.size();
  targets.validate(n);
  if (cfg.sweeps < 1 || cfg.golden_iterations < 1 || !(cfg.initial_half_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fit budget must be positive");
  }
  if (targets.weight_growth > 0.0 && !(targets.growth > -partial.rho)) {
    throw Error(ErrorCode::SearchFailed, "growth target " + std::to_string(targets.growth) +
                                             " is at or below -rho, which no positive psi can reach");
  }

  Vector logT = Vector::Zero(n);
  if (partial.T.size() == n && (partial.T.array() > 0.0).all()) {
    logT = (partial.T.array() / partial.T[0]).log().matrix();
  }

  Objective objective(partial, targets, cfg);
  Evaluation best = objective(logT, std::nullopt);
  if (!std::isfinite(best.objective)) {
    throw Error(ErrorCode::SearchFailed, "the starting point does not solve");
  }

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  Vector half(n);
  half.setConstant(cfg.initial_half_width);
  FitResult out;
  for (int sweep = 0; sweep < cfg.sweeps && best.objective > cfg.stop_objective; ++sweep) {
    ++out.sweeps_run;
    const double start_obj = best.objective;
    for (Eigen::Index j = 1; j < n; ++j) {
      const double x0 = logT[j];
      double a = x0 - half[j];
      double b = x0 + half[j];
      auto eval_at = [&](double x) {
        Vector trial = logT;
        trial[j] = x;
        return objective(trial, best.guess);
      };
      double c = b - inv_phi * (b - a);
      double d = a + inv_phi * (b - a);
      Evaluation fc = eval_at(c);
      Evaluation fd = eval_at(d);
      for (int it = 0; it < cfg.golden_iterations; ++it) {
        if (fc.objective < fd.objective) {
          b = d;
          d = c;
          fd = std::move(fc);
          c = b - inv_phi * (b - a);
          fc = eval_at(c);
        } else {
          a = c;
          c = d;
          fc = std::move(fd);
          d = a + inv_phi * (b - a);
          fd = eval_at(d);
        }
      }
      const bool c_wins = fc.objective < fd.objective;
      Evaluation& cand = c_wins ? fc : fd;
      const double x = c_wins ? c : d;
      if (cand.objective < best.objective) {
        logT[j] = x;
        best = std::move(cand);
      }
      const double moved = std::abs(logT[j] - x0);
      // Recenter with a bracket that follows the last move; widen when the
      // minimum sat on the edge of the old bracket.
      half[j] = moved > 0.9 * half[j] ? 2.0 * half[j] : std::max(3.0 * moved, 1e-7);
    }
    if (!(best.objective < start_obj) && (half.tail(n - 1).array() <= 1e-7).all()) break;
  }

  out.T = logT.array().exp().matrix();
  out.psi = best.psi;
  out.objective = best.objective;
  out.wage_residuals = best.wage_residuals;
  out.growth_residual = best.growth_residual;
  out.solves = objective.solves();
  if (!(out.objective <= cfg.fail_objective)) {
    throw Error(ErrorCode::SearchFailed,
                "objective " + std::to_string(out.objective) + " is above " + std::to_string(cfg.fail_objective));
  }
  return out;
}

}  // namespace tradegrowth
