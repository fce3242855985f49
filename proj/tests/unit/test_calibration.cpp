#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <tradegrowth/calibration.hpp>
#include <tradegrowth/gravity.hpp>
#include <tradegrowth/solver.hpp>

#include "support/fixtures.hpp"

using namespace tradegrowth;

namespace {

FlowTable table(Matrix flows) {
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < flows.rows(); ++i) labels.push_back("c" + std::to_string(i + 1));
  return {std::move(flows), labels};
}

FlowTable model_flows(const ModelParams& raw) {
  const ValidatedParams p = validate_params(raw);
  return final_goods_flows(p, fixtures::solve(p).eq);
}

ModelParams fit_instance() {
  ModelParams p = fixtures::paper_params(3);
  p.tau = fixtures::uniform_tau(3, 2.0);
  p.tau(0, 2) = p.tau(2, 0) = 2.2;
  p.T << 1.0, 1.04, 0.97;
  p.L << 1.0, 0.9, 1.1;
  p.psi = 0.05;
  return p;
}

CalibrationTargets targets_from(const ModelParams& truth) {
  const SolveResult r = fixtures::solve(truth);
  CalibrationTargets t;
  t.wages = r.eq.w;
  t.growth = r.eq.g;
  return t;
}

}  // namespace

TEST(HeadRies, MirrorFlowsGiveUnitCost) {
  Matrix f(2, 2);
  f << 3.0, 2.0, 2.0, 3.0;
  f(0, 1) = f(1, 1);
  f(1, 0) = f(0, 0);
  const HeadRiesResult r = head_ries_costs(table(f), 2.12, 0.36);
  EXPECT_NEAR(r.tau(0, 1), 1.0, 1e-15);
}

TEST(HeadRies, ScalarExamplePerConvention) {
  Matrix f(2, 2);
  f << 1.0, std::sqrt(0.5), std::sqrt(0.5), 1.0;
  const double printed = head_ries_costs(table(f), 2.12, 0.36, HeadRiesConvention::Printed).tau(0, 1);
  EXPECT_NEAR(printed, std::pow(0.5, -1.0 / (2.0 * 2.12 * 0.64)), 1e-14);
  EXPECT_NEAR(std::log(printed) / std::log(0.5), -0.368514150943396, 1e-12);
  const double consistent = head_ries_costs(table(f), 2.12, 0.36).tau(0, 1);
  EXPECT_NEAR(consistent, std::pow(0.5, -1.0 / (2.0 * 2.12)), 1e-14);
}

TEST(HeadRies, RoundTripOnSolvedEquilibria) {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> size(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelParams raw = fixtures::random_instance(static_cast<std::size_t>(size(rng)), rng);
    const HeadRiesResult r = head_ries_costs(model_flows(raw), raw.theta, raw.alpha);
    EXPECT_LT((r.tau - raw.tau).cwiseAbs().maxCoeff(), 1e-9) << "trial " << trial;
    EXPECT_TRUE(r.clamped.empty());
  }
}

TEST(HeadRies, SymmetricWithUnitDiagonal) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  Matrix f(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) f(i, j) = u(rng);
  }
  const HeadRiesResult r = head_ries_costs(table(f), 2.12, 0.36);
  EXPECT_EQ(r.tau, r.tau.transpose());
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(r.tau(i, i), 1.0);
  EXPECT_TRUE((r.tau.array() >= 1.0).all());
}

TEST(HeadRies, RatioAboveOneIsClamped) {
  Matrix f(2, 2);
  f << 1.0, 2.0, 2.0, 1.0;
  const HeadRiesResult r = head_ries_costs(table(f), 2.12, 0.36);
  EXPECT_EQ(r.tau(0, 1), 1.0);
  ASSERT_EQ(r.clamped.size(), 1u);
  EXPECT_EQ(r.clamped[0], (std::pair<std::size_t, std::size_t>{0, 1}));
}

TEST(HeadRies, BadFlowsAreRejected) {
  Matrix f = Matrix::Ones(2, 2);
  f(1, 1) = 0.0;
  try {
    head_ries_costs(table(f), 2.12, 0.36);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroDiagonalFlow);
    EXPECT_NE(std::string(e.what()).find("c2"), std::string::npos);
  }
  f(1, 1) = 1.0;
  f(0, 1) = -1.0;
  try {
    head_ries_costs(table(f), 2.12, 0.36);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeFlow);
  }
}

TEST(TauChange, IdenticalTablesGiveZero) {
  const FlowTable f = model_flows(fit_instance());
  EXPECT_EQ(tau_change_matrix(f, f, 2.12, 0.36), Matrix::Zero(3, 3));
}

TEST(TauChange, BlockCutIsRecovered) {
  // Raising both directions of the 0<->2 flows by 0.82^-theta lowers the
  // recovered cost of that pair by 18% and leaves every other pair alone.
  const FlowTable before = model_flows(fit_instance());
  FlowTable after = before;
  const double bump = std::pow(0.82, -2.12);
  after.flows(0, 2) *= bump;
  after.flows(2, 0) *= bump;
  const Matrix change = tau_change_matrix(before, after, 2.12, 0.36);
  EXPECT_NEAR(change(0, 2), -0.18, 1e-12);
  EXPECT_NEAR(change(2, 0), -0.18, 1e-12);
  EXPECT_NEAR(change(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(change(1, 2), 0.0, 1e-15);
}

TEST(TauChange, CountryMismatchIsAnError) {
  const FlowTable a = table(Matrix::Ones(2, 2));
  const FlowTable b = table(Matrix::Ones(3, 3));
  EXPECT_THROW(tau_change_matrix(a, b, 2.12, 0.36), Error);
}

TEST(Fit, RecoversKnownParameters) {
  const ModelParams truth = fit_instance();
  ModelParams partial = truth;
  partial.T.setOnes();
  partial.psi = 1.0;
  const FitResult fit = fit_free_params(partial, targets_from(truth));
  EXPECT_LT(fit.objective, 1e-8);
  EXPECT_LT((fit.T - truth.T).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_NEAR(fit.psi, truth.psi, 1e-6);
  EXPECT_LT(std::abs(fit.growth_residual), 1e-8);
}

TEST(Fit, SymmetricTargetsGiveSymmetricT) {
  ModelParams partial = fixtures::paper_params(3);
  partial.tau = fixtures::uniform_tau(3, 2.0);
  partial.T << 1.0, 1.3, 0.8;
  CalibrationTargets t;
  t.wages = Vector::Ones(3);
  t.growth = 0.02;
  const FitResult fit = fit_free_params(partial, t);
  EXPECT_LT((fit.T - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Fit, GrowthBelowMinusRhoFails) {
  CalibrationTargets t;
  t.wages = Vector::Ones(2);
  t.growth = -0.05;
  try {
    fit_free_params(fixtures::figure_params(1.5), t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SearchFailed);
  }
}

TEST(Fit, WageTargetScaleDoesNotMatter) {
  const ModelParams truth = fit_instance();
  ModelParams partial = truth;
  partial.T << 1.0, 1.1, 0.9;
  CalibrationTargets t = targets_from(truth);
  const FitResult a = fit_free_params(partial, t);
  t.wages *= 37.0;
  const FitResult b = fit_free_params(partial, t);
  EXPECT_LT((a.T - b.T).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(a.psi, b.psi, 1e-8);
}
