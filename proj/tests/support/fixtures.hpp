#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include <tradegrowth/analysis.hpp>
#include <tradegrowth/gravity.hpp>
#include <tradegrowth/model.hpp>
#include <tradegrowth/solver.hpp>

namespace fixtures {

using tradegrowth::Matrix;
using tradegrowth::ModelParams;
using tradegrowth::Vector;

inline ModelParams paper_params(std::size_t n) {
  ModelParams p;
  p.theta = 2.12;
  p.sigma = 0.76;
  p.alpha = 0.36;
  p.rho = 0.03;
  p.psi = 2.46;
  p.T = Vector::Ones(static_cast<Eigen::Index>(n));
  p.L = Vector::Ones(static_cast<Eigen::Index>(n));
  p.tau = Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  return p;
}

// Parameters of the two-country growth figure.
inline ModelParams figure_params(double tau) {
  ModelParams p = paper_params(2);
  p.sigma = 0.77;
  p.alpha = 1.0 / 3.0;
  p.L << 1.0, 1.03;
  p.tau << 1.0, tau, tau, 1.0;
  return p;
}

// T_s = L_s^(-theta(1-alpha)) equalizes the autarky return to R&D across
// countries. Without it, weakly linked economies cannot share a growth rate
// unless all but the strongest stop innovating.
inline Vector balanced_T(const ModelParams& p) {
  return p.L.array().pow(-p.theta * (1.0 - p.alpha)).matrix();
}

// Near autarky the cross-country coupling is of order tau^(1-eta), so returns
// differ by about 1e-9 wherever M sits and finite-difference Jacobians drown in
// the inner-loop noise. A 1e-8 return gap is the attainable outer tolerance.
inline tradegrowth::SolverConfig near_autarky_config() {
  tradegrowth::SolverConfig cfg;
  cfg.tol_outer = 1e-8;
  return cfg;
}

inline Matrix uniform_tau(std::size_t n, double tau) {
  Matrix t = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), tau);
  t.diagonal().setOnes();
  return t;
}

// Symmetric tau with entries tau_bar * (1 + noise * u), u uniform in [0, 1].
inline Matrix noisy_tau(std::size_t n, double tau_bar, double noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix t = Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index s = 0; s < t.rows(); ++s) {
    for (Eigen::Index d = s + 1; d < t.cols(); ++d) t(s, d) = t(d, s) = tau_bar * (1.0 + noise * u(rng));
  }
  return t;
}

// Random asymmetric instance: common cost level in [1.5, 3] with 5% pair noise,
// T and L in [0.9, 1.1]. Wider boxes are mostly corner solutions because
// returns to R&D rise with a country's share of varieties.
inline ModelParams random_instance(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> level(1.5, 3.0);
  std::uniform_real_distribution<double> near_one(0.9, 1.1);
  ModelParams p = paper_params(n);
  for (Eigen::Index i = 0; i < p.L.size(); ++i) {
    p.T[i] = near_one(rng);
    p.L[i] = near_one(rng);
  }
  p.tau = noisy_tau(n, level(rng), 0.05, rng);
  return p;
}

// Largest goods-market and trade-balance residuals seen so far, so that the
// acceptance report can state the worst case over every solve it ran.
struct ResidualLog {
  double goods_small = 0.0;  // N <= 4
  double goods_large = 0.0;
  double balance_small = 0.0;
  double balance_large = 0.0;
  long count = 0;

  void record(const tradegrowth::ValidatedParams& p, const tradegrowth::Equilibrium& eq) {
    const double g = tradegrowth::goods_market_residual(p, eq).cwiseAbs().maxCoeff();
    const double b = tradegrowth::trade_balance_residual(p, eq).cwiseAbs().maxCoeff();
    if (p.size() <= 4) {
      goods_small = std::max(goods_small, g);
      balance_small = std::max(balance_small, b);
    } else {
      goods_large = std::max(goods_large, g);
      balance_large = std::max(balance_large, b);
    }
    ++count;
  }

  bool ok() const { return goods_small < 1e-8 && balance_small < 1e-8 && goods_large < 1e-6 && balance_large < 1e-6; }
};

inline ResidualLog& residual_log() {
  static ResidualLog log;
  return log;
}

// solve_bgp plus a residual record; every test solve goes through here.
inline tradegrowth::SolveResult solve(const tradegrowth::ValidatedParams& p, const tradegrowth::SolverConfig& cfg = {}) {
  tradegrowth::SolveResult r = tradegrowth::solve_bgp(p, cfg);
  residual_log().record(p, r.eq);
  return r;
}

inline tradegrowth::SolveResult solve(const ModelParams& p, const tradegrowth::SolverConfig& cfg = {}) {
  return solve(tradegrowth::validate_params(p), cfg);
}

}  // namespace fixtures
