#include "tradegrowth/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "kernels.hpp"
#include "tradegrowth/gravity.hpp"

namespace tradegrowth {

void SolverConfig::validate() const {
  const double floor_tol = std::numeric_limits<double>::epsilon() * 1e3;
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (!(tol_inner >= floor_tol) || !(tol_mid >= floor_tol) || !(tol_outer >= floor_tol)) {
    bad("tolerances must be at least 1e3 * machine epsilon");
  }
  if (max_iter_inner < 1 || max_iter_mid < 1 || max_iter_outer < 1) bad("iteration limits must be positive");
  for (double d : {damping_inner, damping_mid, damping_outer}) {
    if (!(d > 0.0 && d <= 1.0)) bad("damping factors must lie in (0, 1]");
  }
  if (anderson_depth < 0) bad("anderson_depth must be nonnegative");
  if (!(measure_floor > 0.0 && measure_floor < 1e-6)) bad("measure_floor must lie in (0, 1e-6)");
}

SolverError::SolverError(ErrorCode code, const std::string& message, SolveTrace trace,
                         std::optional<Equilibrium> partial)
    : Error(code, message), trace_(std::move(trace)), partial_(std::move(partial)) {}

namespace {

using Clock = std::chrono::steady_clock;

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool all_finite(const Vector& v) { return v.allFinite(); }

// Shift a log vector so that its exponentials sum to one.
Vector normalize_log(const Vector& u) { return (u.array() - detail::log_sum_exp(u)).matrix(); }

// Type-II Anderson mixing for a fixed-point map x -> x + f(x).
class AndersonMixer {
 public:
  AndersonMixer(int depth, double beta, double max_step) : depth_(depth), beta_(beta), max_step_(max_step) {}

  void reset() {
    xs_.clear();
    fs_.clear();
  }

  Vector next(const Vector& x, const Vector& f) {
    xs_.push_back(x);
    fs_.push_back(f);
    if (static_cast<int>(xs_.size()) > depth_ + 1) {
      xs_.pop_front();
      fs_.pop_front();
    }
    Vector step = beta_ * f;
    const auto m = static_cast<Eigen::Index>(xs_.size()) - 1;
    if (m > 0) {
      Matrix dx(x.size(), m);
      Matrix df(x.size(), m);
      for (Eigen::Index i = 0; i < m; ++i) {
        dx.col(i) = xs_[i + 1] - xs_[i];
        df.col(i) = fs_[i + 1] - fs_[i];
      }
      const Vector coef = df.completeOrthogonalDecomposition().solve(f);
      const Vector mixed = beta_ * f - (dx + beta_ * df) * coef;
      if (mixed.allFinite()) {
        step = mixed;
      } else {
        reset();
      }
    }
    const double size = sup_norm(step);
    if (size > max_step_) step *= max_step_ / size;
    return x + step;
  }

 private:
  int depth_;
  double beta_;
  double max_step_;
  std::deque<Vector> xs_;
  std::deque<Vector> fs_;
};

// The three nested loops share warm starts through this object: every call to
// wages() begins from the last converged wages and prices.
class Nest {
 public:
  Nest(const ValidatedParams& p, const SolverConfig& cfg, SolveTrace& trace)
      : p_(p), cfg_(cfg), trace_(trace), logL_(p.L().array().log().matrix()) {}

  void set_start(const Vector& w, const Vector& P) {
    logv_ = normalize_log((w.array().log() + logL_.array()).matrix());
    logP_ = P.array().log().matrix();
  }

  Vector inner(const Vector& logw, const Vector& logM, Vector logP) {
    std::vector<double>& deltas = trace_.inner_deltas;
    deltas.clear();
    const double d = cfg_.damping_inner;
    for (long it = 0; it < cfg_.max_iter_inner; ++it) {
      const Vector logPM = detail::log_composite(p_, logM, logP);
      const Vector next = detail::log_final_price(p_, logw, logPM);
      const double delta = sup_norm(next - logP);
      deltas.push_back(delta);
      ++trace_.inner_iterations;
      if (!all_finite(next)) {
        throw SolverError(ErrorCode::DivergenceDetected, "non-finite price iterate", trace_);
      }
      logP = (d == 1.0) ? next : Vector((1.0 - d) * logP + d * next);
      if (delta < cfg_.tol_inner) {
        trace_.inner_converged = true;
        return logP;
      }
    }
    trace_.inner_converged = false;
    throw SolverError(ErrorCode::MaxIterExceeded, "inner price loop did not converge", trace_);
  }

  // Solves the wage loop at logM and leaves (logv_, logP_) at the solution.
  void wages(const Vector& logM) {
    ++trace_.mid_solves;
    std::vector<double> deltas;
    const double a = p_.alpha();
    const double beta = cfg_.damping_mid / (1.0 + p_.theta() * (1.0 - a));
    AndersonMixer mixer(cfg_.anderson_depth, beta, 0.5);
    Vector u = logv_;
    for (long it = 0; it < cfg_.max_iter_mid; ++it) {
      const Vector logw = u - logL_;
      logP_ = inner(logw, logM, logP_);
      const Vector logPM = detail::log_composite(p_, logM, logP_);
      lambdaF_ = detail::softmax_cols(detail::final_logits(p_, logw, logPM));
      lambdaM_ = detail::softmax_cols(detail::intermediate_logits(p_, logM, logP_));
      const Vector v = u.array().exp().matrix();
      const Vector demand = lambdaF_ * ((1.0 - a) * v + a * (lambdaM_ * v));
      const Vector f = (demand.array().log() - u.array()).matrix();
      const double delta = sup_norm(f);
      deltas.push_back(delta);
      ++trace_.mid_iterations;
      if (!std::isfinite(delta)) {
        trace_.mid_deltas = std::move(deltas);
        throw SolverError(ErrorCode::DivergenceDetected, "non-finite wage iterate", trace_);
      }
      if (delta < cfg_.tol_mid) {
        logv_ = u;
        logPM_ = logPM;
        trace_.mid_deltas = std::move(deltas);
        trace_.mid_converged = true;
        return;
      }
      u = normalize_log(mixer.next(u, f));
    }
    trace_.mid_deltas = std::move(deltas);
    trace_.mid_converged = false;
    throw SolverError(ErrorCode::MaxIterExceeded, "wage loop did not converge", trace_);
  }

  // log of real profit per variety at the current wage solution.
  Vector log_returns(const Vector& logM) const {
    const Vector v = logv_.array().exp().matrix();
    const Vector profits = p_.alpha() * (lambdaM_ * v);
    return (profits.array().log() - logP_.array() - logM.array()).matrix();
  }

  Vector w() const { return (logv_ - logL_).array().exp().matrix(); }
  Vector P() const { return logP_.array().exp().matrix(); }
  Vector PM() const { return logPM_.array().exp().matrix(); }
  const Matrix& lambdaF() const { return lambdaF_; }
  const Matrix& lambdaM() const { return lambdaM_; }
  const Vector& logv() const { return logv_; }
  const Vector& logP() const { return logP_; }
  void restore(const Vector& logv, const Vector& logP) {
    logv_ = logv;
    logP_ = logP;
  }

 private:
  const ValidatedParams& p_;
  const SolverConfig& cfg_;
  SolveTrace& trace_;
  Vector logL_;
  Vector logv_;
  Vector logP_;
  Vector logPM_;
  Matrix lambdaF_;
  Matrix lambdaM_;
};

// Outer state: u = log M normalized, plus which countries sit on the floor.
struct OuterEval {
  Vector f;       // log(R_s / Rbar), Rbar the variety-weighted mean return
  Vector resid;   // complementarity residual per country
  double merit = 0.0;
  double delta = 0.0;
  std::vector<bool> at_floor;
};

OuterEval evaluate(Nest& nest, const Vector& u, double log_floor) {
  nest.wages(u);
  const Vector lr = nest.log_returns(u);
  OuterEval e;
  // sum_s m_s R_s, so that d log m_s / dt = R_s - Rbar keeps sum m = 1.
  const double log_mean = detail::log_sum_exp((lr + u).eval());
  e.f = (lr.array() - log_mean).matrix();
  e.resid.resize(u.size());
  e.at_floor.assign(static_cast<std::size_t>(u.size()), false);
  for (Eigen::Index s = 0; s < u.size(); ++s) {
    const bool low = u[s] <= log_floor + 1e-12;
    e.at_floor[static_cast<std::size_t>(s)] = low;
    // A country on the floor is in equilibrium as long as its return does not
    // exceed the common one.
    e.resid[s] = low ? std::max(e.f[s], 0.0) : std::abs(e.f[s]);
  }
  e.delta = sup_norm(e.resid);
  e.merit = e.resid.squaredNorm();
  return e;
}

Vector project(const Vector& u, double log_floor) {
  Vector x = normalize_log(u.cwiseMax(log_floor));
  return x.cwiseMax(log_floor);
}

void mark_oscillation(SolveTrace& trace) {
  const auto& d = trace.outer_deltas;
  trace.oscillation = false;
  if (d.size() < 10) return;
  for (std::size_t i = d.size() - 9; i < d.size(); ++i) {
    if (d[i] > 1.1 * d[i - 1]) trace.oscillation = true;
  }
}

Equilibrium assemble(const ValidatedParams& p, const Nest& nest, const Vector& u, const OuterEval& e,
                     const SolveTrace& trace) {
  Equilibrium eq;
  eq.w = nest.w();
  eq.P = nest.P();
  eq.PM = nest.PM();
  eq.M = u.array().exp().matrix();
  eq.shares.lambdaF = nest.lambdaF();
  eq.shares.lambdaM = nest.lambdaM();
  const Vector v = eq.w.cwiseProduct(p.L());
  const Vector profits = p.alpha() * (eq.shares.lambdaM * v);
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index s = 0; s < u.size(); ++s) {
    const bool corner = e.at_floor[static_cast<std::size_t>(s)] && e.f[s] < 0.0;
    if (corner) {
      eq.corner.push_back(static_cast<std::size_t>(s));
      continue;
    }
    num += profits[s];
    den += eq.P[s] * eq.M[s];
  }
  eq.R = num / den;
  eq.g = p.psi() * eq.R - p.rho();
  eq.residuals.inner = trace.inner_deltas.empty() ? 0.0 : trace.inner_deltas.back();
  eq.residuals.mid = trace.mid_deltas.empty() ? 0.0 : trace.mid_deltas.back();
  eq.residuals.outer = e.delta;
  eq.residuals.inner_iterations = trace.inner_iterations;
  eq.residuals.mid_iterations = trace.mid_iterations;
  eq.residuals.outer_iterations = trace.outer_iterations;
  eq.residuals.goods_market = sup_norm(goods_market_residual(p, eq));
  eq.residuals.trade_balance = sup_norm(trade_balance_residual(p, eq));
  eq.converged = trace.outer_converged;
  return eq;
}

// Pseudo-transient continuation on d u / dt = f(u): each step solves
// (I/dt - J) du = f. Small dt follows the share dynamics, which only settle on
// stable balanced growth paths; dt grows as the residual falls (switched
// evolution relaxation) and the step turns into Newton near the solution.
void ptc_outer(const SolverConfig& cfg, Nest& nest, Vector& u, OuterEval& e, SolveTrace& trace,
               double log_floor) {
  const Eigen::Index n = u.size();
  const double h = 1e-6;
  double dt = 1.0;
  for (;;) {
    trace.outer_deltas.push_back(e.delta);
    if (e.delta < cfg.tol_outer) {
      trace.outer_converged = true;
      return;
    }
    if (trace.outer_iterations >= cfg.max_iter_outer) return;
    ++trace.outer_iterations;

    std::vector<Eigen::Index> free;
    for (Eigen::Index s = 0; s < n; ++s) {
      if (!(e.at_floor[static_cast<std::size_t>(s)] && e.f[s] < 0.0)) free.push_back(s);
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    const Vector base_v = nest.logv();
    const Vector base_P = nest.logP();

    Matrix J(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      Vector up = u;
      up[free[j]] += h;
      up = normalize_log(up);
      nest.restore(base_v, base_P);
      nest.wages(up);
      const Vector lr = nest.log_returns(up);
      const double log_mean = detail::log_sum_exp((lr + up).eval());
      for (Eigen::Index i = 0; i < m; ++i) J(i, j) = (lr[free[i]] - log_mean - e.f[free[i]]) / h;
    }
    Vector rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) rhs[i] = e.f[free[i]];

    const double r0 = std::sqrt(e.merit);
    bool accepted = false;
    while (!accepted) {
      Matrix A = -J;
      A.diagonal().array() += 1.0 / dt;
      const Vector sol = A.completeOrthogonalDecomposition().solve(rhs);
      Vector step = Vector::Zero(n);
      for (Eigen::Index i = 0; i < m; ++i) step[free[i]] = sol[i];
      // Drop the common shift that the normalization removes anyway; near
      // convergence it can dwarf the useful part of the step.
      const double shift = u.array().exp().matrix().dot(step);
      for (Eigen::Index s : free) step[s] -= shift;
      const double size = sup_norm(step);
      if (size > 20.0) step *= 20.0 / size;

      const Vector trial = project(u + step, log_floor);
      nest.restore(base_v, base_P);
      OuterEval et;
      bool ok = step.allFinite();
      if (ok) {
        try {
          et = evaluate(nest, trial, log_floor);
        } catch (const SolverError&) {
          ok = false;
        }
      }
      const double r1 = ok ? std::sqrt(et.merit) : std::numeric_limits<double>::infinity();
      if (ok && std::isfinite(r1) && (r1 <= 2.0 * r0 || dt <= 1e-6)) {
        u = trial;
        e = std::move(et);
        // Moving off an unstable point or sliding toward the floor raises the
        // residual slowly; dt still grows there, only more cautiously.
        const double ratio = r0 / std::max(r1, 1e-300);
        dt = std::min(dt * (ratio >= 1.0 ? std::clamp(ratio, 2.0, 10.0) : 1.2), 1e14);
        accepted = true;
      } else if (dt > 1e-6) {
        dt *= 0.25;
      } else {
        nest.restore(base_v, base_P);
        throw SolverError(ErrorCode::DivergenceDetected, "outer step failed at the smallest time step", trace);
      }
    }
  }
}

void damped_outer(const SolverConfig& cfg, Nest& nest, Vector& u, OuterEval& e, SolveTrace& trace,
                  double log_floor) {
  AndersonMixer mixer(cfg.anderson_depth, cfg.damping_outer, 1.0);
  // Countries with a share below this slide toward the floor at a constant
  // rate; mixing them in stalls the extrapolation, so they take plain steps.
  const double log_thin = std::log(1e-6);
  std::vector<Eigen::Index> mixed;
  for (;;) {
    trace.outer_deltas.push_back(e.delta);
    if (e.delta < cfg.tol_outer) {
      trace.outer_converged = true;
      return;
    }
    if (trace.outer_iterations >= cfg.max_iter_outer) return;
    ++trace.outer_iterations;

    Vector step = e.f;
    std::vector<Eigen::Index> thick;
    for (Eigen::Index s = 0; s < u.size(); ++s) {
      if (e.at_floor[static_cast<std::size_t>(s)] && step[s] < 0.0) step[s] = 0.0;
      if (u[s] > log_thin) thick.push_back(s);
    }
    if (thick != mixed) {
      mixer.reset();
      mixed = thick;
    }
    Vector raw = u + cfg.damping_outer * step;
    if (!mixed.empty()) {
      const auto k = static_cast<Eigen::Index>(mixed.size());
      Vector us(k);
      Vector fs(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        us[i] = u[mixed[i]];
        fs[i] = step[mixed[i]];
      }
      const Vector next = mixer.next(us, fs);
      for (Eigen::Index i = 0; i < k; ++i) raw[mixed[i]] = next[i];
    }
    u = project(raw, log_floor);
    e = evaluate(nest, u, log_floor);
  }
}

Vector positive_random(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace

InitialGuess initial_guess(const ValidatedParams& p, const SolverConfig& cfg) {
  const Eigen::Index n = p.n();
  InitialGuess g;
  if (cfg.seed) {
    std::mt19937_64 rng(*cfg.seed);
    g.w = positive_random(rng, n);
    g.M = positive_random(rng, n);
    g.P = positive_random(rng, n);
  } else {
    g.w = p.L().cwiseInverse();
    g.M = p.L();
    g.P = Vector::Ones(n);
  }
  g.w /= g.w.dot(p.L());
  g.M /= g.M.sum();
  return g;
}

Vector inner_price_fixed_point(const ValidatedParams& p, const Vector& w, const Vector& M, const Vector& P_guess,
                               const SolverConfig& cfg, SolveTrace* trace) {
  cfg.validate();
  for (const Vector* v : {&w, &M, &P_guess}) {
    if (v->size() != p.n()) throw Error(ErrorCode::DimensionMismatch, "input vector has the wrong length");
    if (!((v->array() > 0.0).all() && v->allFinite())) {
      throw Error(ErrorCode::NonPositiveParam, "inputs must be finite and positive");
    }
  }
  SolveTrace local;
  SolveTrace& t = trace ? *trace : local;
  Nest nest(p, cfg, t);
  const Vector logP = nest.inner(w.array().log().matrix(), M.array().log().matrix(),
                                 P_guess.array().log().matrix());
  return logP.array().exp().matrix();
}

WagesAndPrices mid_wage_fixed_point(const ValidatedParams& p, const Vector& M, const SolverConfig& cfg,
                                    const std::optional<WagesAndPrices>& guess, SolveTrace* trace) {
  cfg.validate();
  if (M.size() != p.n()) throw Error(ErrorCode::DimensionMismatch, "M has the wrong length");
  if (!((M.array() > 0.0).all() && M.allFinite())) {
    throw Error(ErrorCode::NonPositiveParam, "M must be finite and positive");
  }
  SolveTrace local;
  SolveTrace& t = trace ? *trace : local;
  Nest nest(p, cfg, t);
  if (guess) {
    nest.set_start(guess->w, guess->P);
  } else {
    const InitialGuess g = initial_guess(p, cfg);
    nest.set_start(g.w, g.P);
  }
  nest.wages(M.array().log().matrix());
  return {nest.w(), nest.P()};
}

Equilibrium outer_measure_fixed_point(const ValidatedParams& p, const SolverConfig& cfg,
                                      const std::optional<InitialGuess>& start, SolveTrace* trace) {
  cfg.validate();
  const auto t0 = Clock::now();
  SolveTrace local;
  SolveTrace& t = trace ? *trace : local;
  const InitialGuess g = start ? *start : initial_guess(p, cfg);
  const Eigen::Index n = p.n();
  if (g.w.size() != n || g.M.size() != n || g.P.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "initial guess has the wrong length");
  }
  for (const Vector* v : {&g.w, &g.M, &g.P}) {
    if (!((v->array() > 0.0).all() && v->allFinite())) {
      throw Error(ErrorCode::NonPositiveParam, "initial guess must be finite and positive");
    }
  }

  const double log_floor = std::log(cfg.measure_floor);
  Nest nest(p, cfg, t);
  nest.set_start(g.w, g.P);
  Vector u = project(g.M.array().log().matrix(), log_floor);

  auto finish = [&](const OuterEval& e) {
    t.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    mark_oscillation(t);
    return assemble(p, nest, u, e, t);
  };

  OuterEval e;
  try {
    e = evaluate(nest, u, log_floor);
    if (cfg.outer_method == OuterMethod::PseudoTransient) {
      ptc_outer(cfg, nest, u, e, t, log_floor);
    } else {
      damped_outer(cfg, nest, u, e, t, log_floor);
    }
  } catch (const SolverError& err) {
    t.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    throw SolverError(err.code(), err.issues().front().message, t);
  }
  Equilibrium eq = finish(e);
  if (!u.allFinite()) {
    throw SolverError(ErrorCode::DivergenceDetected, "non-finite variety measures", t, eq);
  }
  if (!t.outer_converged) {
    throw SolverError(ErrorCode::MaxIterExceeded,
                      "outer loop did not converge in " + std::to_string(cfg.max_iter_outer) + " iterations", t,
                      eq);
  }
  return eq;
}

Vector outer_step(const ValidatedParams& p, const Vector& M, const SolverConfig& cfg) {
  cfg.validate();
  if (M.size() != p.n() || !((M.array() > 0.0).all() && M.allFinite())) {
    throw Error(ErrorCode::NonPositiveParam, "M must be finite, positive, and of length N");
  }
  SolveTrace t;
  Nest nest(p, cfg, t);
  const InitialGuess g = initial_guess(p, cfg);
  nest.set_start(g.w, g.P);
  const Vector logM = M.array().log().matrix();
  nest.wages(logM);
  const Vector lr = nest.log_returns(logM);
  const Vector next = logM + cfg.damping_outer * lr;
  return normalize_log(next).array().exp().matrix();
}

SolveResult solve_bgp(const ValidatedParams& p, const SolverConfig& cfg) {
  SolveResult r;
  r.eq = outer_measure_fixed_point(p, cfg, std::nullopt, &r.trace);
  return r;
}

SolveResult solve_bgp(const ValidatedParams& p, const SolverConfig& cfg, const InitialGuess& warm) {
  SolveResult r;
  r.eq = outer_measure_fixed_point(p, cfg, warm, &r.trace);
  return r;
}

Vector real_profit_per_variety(const ValidatedParams& p, const Equilibrium& eq) {
  const Vector v = eq.w.cwiseProduct(p.L());
  const Vector profits = p.alpha() * (eq.shares.lambdaM * v);
  return profits.cwiseQuotient(eq.P.cwiseProduct(eq.M));
}

}  // namespace tradegrowth
