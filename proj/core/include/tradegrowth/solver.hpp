#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tradegrowth/model.hpp"

namespace tradegrowth {

enum class OuterMethod {
  PseudoTransient,  // implicit steps along the share dynamics, finite-difference Jacobian
  Damped,  // damped return-equalization step with Anderson acceleration
};

struct SolverConfig {
  double tol_inner = 1e-12;
  double tol_mid = 1e-11;
  double tol_outer = 1e-10;
  long max_iter_inner = 10000;
  long max_iter_mid = 10000;
  long max_iter_outer = 10000;
  double damping_inner = 1.0;
  double damping_mid = 1.0;
  double damping_outer = 0.5;
  std::optional<std::uint64_t> seed;  // random initial guesses when set
  OuterMethod outer_method = OuterMethod::PseudoTransient;
  int anderson_depth = 5;
  double measure_floor = 1e-13;  // smallest admissible variety share

  // Throws Error(InvalidArgument) when a field is out of range.
  void validate() const;
};

struct SolveTrace {
  std::vector<double> inner_deltas;  // most recent inner solve
  std::vector<double> mid_deltas;    // most recent wage solve
  std::vector<double> outer_deltas;  // every outer iteration
  long inner_iterations = 0;         // totals across the whole solve
  long mid_iterations = 0;
  long outer_iterations = 0;
  long mid_solves = 0;
  bool inner_converged = false;
  bool mid_converged = false;
  bool outer_converged = false;
  bool oscillation = false;  // last ten outer deltas not monotone within 10%
  double wall_seconds = 0.0;
};

// A solver failure with the trace, and the last iterate when one exists.
class SolverError : public Error {
 public:
  SolverError(ErrorCode code, const std::string& message, SolveTrace trace,
              std::optional<Equilibrium> partial = std::nullopt);
  const SolveTrace& trace() const noexcept { return trace_; }
  const std::optional<Equilibrium>& partial() const noexcept { return partial_; }

 private:
  SolveTrace trace_;
  std::optional<Equilibrium> partial_;
};

struct InitialGuess {
  Vector w;
  Vector M;
  Vector P;
};

// w proportional to 1/L, M proportional to L, P = 1; uniform draws in
// [0.5, 1.5] when cfg.seed is set. Returned normalized.
InitialGuess initial_guess(const ValidatedParams& p, const SolverConfig& cfg);

// Final prices consistent with (w, M): P = final_price_index(w, PM(M, P)).
Vector inner_price_fixed_point(const ValidatedParams& p, const Vector& w, const Vector& M,
                               const Vector& P_guess, const SolverConfig& cfg,
                               SolveTrace* trace = nullptr);

struct WagesAndPrices {
  Vector w;  // normalized so that sum w L = 1
  Vector P;
};

// Wages that clear the goods market for fixed variety measures M.
WagesAndPrices mid_wage_fixed_point(const ValidatedParams& p, const Vector& M, const SolverConfig& cfg,
                                    const std::optional<WagesAndPrices>& guess = std::nullopt,
                                    SolveTrace* trace = nullptr);

// Variety measures that equalize the return to R&D across countries, with the
// nested wage and price loops solved at every iterate.
Equilibrium outer_measure_fixed_point(const ValidatedParams& p, const SolverConfig& cfg,
                                      const std::optional<InitialGuess>& start = std::nullopt,
                                      SolveTrace* trace = nullptr);

// One damped return-equalization update M' proportional to M (R_s / R)^d,
// normalized to sum one. Invariant to rescaling M.
Vector outer_step(const ValidatedParams& p, const Vector& M, const SolverConfig& cfg);

struct SolveResult {
  Equilibrium eq;
  SolveTrace trace;
};

SolveResult solve_bgp(const ValidatedParams& p, const SolverConfig& cfg = {});
SolveResult solve_bgp(const ValidatedParams& p, const SolverConfig& cfg, const InitialGuess& warm);

// Real profit per variety Pi_s / (P_s M_s) at a state (w, M, P) with shares.
Vector real_profit_per_variety(const ValidatedParams& p, const Equilibrium& eq);

}  // namespace tradegrowth
