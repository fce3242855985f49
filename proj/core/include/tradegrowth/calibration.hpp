#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tradegrowth/model.hpp"
#include "tradegrowth/solver.hpp"

namespace tradegrowth {

// Exponent applied to the ratio product (E_sd/E_dd)(E_ds/E_ss).
enum class HeadRiesConvention {
  ModelConsistent,  // -1/(2 theta): inverts the gravity equation of this model exactly
  Printed,          // -1/(2 theta (1-alpha)): the variant with the input-output scaling
};

struct HeadRiesResult {
  Matrix tau;
  // Pairs (s, d), s < d, whose ratio product exceeded one and were set to tau = 1.
  std::vector<std::pair<std::size_t, std::size_t>> clamped;
};

HeadRiesResult head_ries_costs(const FlowTable& flows, double theta, double alpha,
                               HeadRiesConvention convention = HeadRiesConvention::ModelConsistent);

// Entrywise tau_after / tau_before - 1.
Matrix tau_change_matrix(const FlowTable& before, const FlowTable& after, double theta, double alpha,
                         HeadRiesConvention convention = HeadRiesConvention::ModelConsistent);

struct CalibrationTargets {
  Vector wages;  // target wage distribution, rescaled internally to sum to one
  double growth = 0.0;
  double weight_wages = 1.0;
  double weight_growth = 1.0;

  void validate(Eigen::Index n) const;
};

struct FitConfig {
  int sweeps = 40;               // coordinate passes over log T
  int golden_iterations = 40;    // golden-section steps per coordinate
  double initial_half_width = 1.5;  // half-width of the first log T bracket
  double stop_objective = 1e-14;    // stop early once the objective is this small
  double fail_objective = 1e-6;     // SearchFailed above this after the budget
  SolverConfig solver;
};

struct FitResult {
  Vector T;  // T_1 = 1
  double psi = 0.0;
  double objective = 0.0;
  Vector wage_residuals;  // model share minus target share
  double growth_residual = 0.0;
  int sweeps_run = 0;
  long solves = 0;
};

// Fits T (first entry pinned to 1) and psi to the targets. tau, L, theta,
// sigma, alpha, and rho in `partial` are held fixed; its T and psi serve as the
// starting point when they are set.
FitResult fit_free_params(const ModelParams& partial, const CalibrationTargets& targets, const FitConfig& cfg = {});

}  // namespace tradegrowth
