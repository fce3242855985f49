#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <tradegrowth/analysis.hpp>
#include <tradegrowth/gravity.hpp>
#include <tradegrowth/solver.hpp>

#include "support/fixtures.hpp"

using namespace tradegrowth;

namespace {

struct Pair {
  ValidatedParams base;
  Equilibrium eq_base;
  ValidatedParams next;
  Equilibrium eq_next;
};

Pair solve_pair(const ModelParams& base, const Matrix& tau_next) {
  ModelParams shocked = base;
  shocked.tau = tau_next;
  const ValidatedParams a = validate_params(base);
  const ValidatedParams b = validate_params(shocked);
  return {a, fixtures::solve(a).eq, b, fixtures::solve(b).eq};
}

// Discounted log consumption difference between the two paths, by adaptive
// Gauss-Kronrod quadrature on [0, 2000]:
//   int exp(-rho t) [log C_new - log C_base + (g_new - g_base) t] dt,
// with C = rho M / psi + w L / P read straight off the equilibria.
double quadrature_welfare(const Pair& pr, Eigen::Index s) {
  const double rho = pr.base.rho();
  auto level = [](const ValidatedParams& p, const Equilibrium& eq, Eigen::Index i) {
    return p.rho() * eq.M[i] / p.psi() + eq.w[i] * p.L()[i] / eq.P[i];
  };
  const double log_c_ratio = std::log(level(pr.next, pr.eq_next, s) / level(pr.base, pr.eq_base, s));
  const double dg = pr.eq_next.g - pr.eq_base.g;
  auto f = [&](double t) { return std::exp(-rho * t) * (log_c_ratio + dg * t); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2000.0, 15, 1e-14, &err);
}

}  // namespace

TEST(GrowthRate, SymmetricZeroGravityMatchesClosedForm) {
  const SolveResult r = fixtures::solve(fixtures::paper_params(3));
  const ValidatedParams p = validate_params(fixtures::paper_params(3));
  const GrowthDecomposition gd = growth_rate(p, r.eq);
  for (const auto& c : gd.countries) EXPECT_NEAR(c.g, gd.g_common, 1e-10);
  EXPECT_NEAR(gd.g_common, zero_gravity_growth_rate(p, r.eq), 1e-8);
  EXPECT_NEAR(gd.g_common, symmetric_g_of_tau(p, 1.0), 1e-8);
}

TEST(GrowthRate, SingleCountryIsAutarky) {
  const ValidatedParams p = validate_params(fixtures::paper_params(1));
  const SolveResult r = fixtures::solve(p);
  EXPECT_NEAR(growth_rate(p, r.eq).g_common, autarky_growth_rate(p, r.eq)[0], 1e-10);
}

TEST(GrowthRate, ComponentsAddUpToReturn) {
  std::mt19937_64 rng(8);
  const ValidatedParams p = validate_params(fixtures::random_instance(4, rng));
  const SolveResult r = fixtures::solve(p);
  const GrowthDecomposition gd = growth_rate(p, r.eq);
  for (const auto& c : gd.countries) {
    if (c.corner) continue;
    EXPECT_NEAR(c.romer_domestic + c.romer_global, c.g + p.rho(), 1e-9);
    EXPECT_NEAR(c.g, r.eq.g, 1e-8);
  }
}

TEST(GrowthRate, FigureCurveDecreases) {
  double prev = INFINITY;
  for (double tau : {1.0, 1.2, 1.5, 2.0, 3.0}) {
    const double g = fixtures::solve(fixtures::figure_params(tau)).eq.g;
    EXPECT_LT(g, prev - 1e-10) << "tau " << tau;
    prev = g;
  }
}

TEST(GrowthRate, RequiresConvergedEquilibrium) {
  const ValidatedParams p = validate_params(fixtures::paper_params(2));
  Equilibrium eq = fixtures::solve(p).eq;
  eq.converged = false;
  EXPECT_THROW(growth_rate(p, eq), Error);
}

TEST(AutarkyGrowth, ScalarExamples) {
  const double alpha = 1.0 / 3.0;
  const double eta = 1.5;
  EXPECT_NEAR(autarky_growth_rate(alpha, 2.46, 0.03, eta * 0.03 / (alpha * 2.46)), 0.0, 1e-15);
  EXPECT_NEAR(autarky_growth_rate(alpha, 2.46, 0.03, 1.0), 2.46 / 4.5 - 0.03, 1e-15);
}

TEST(AutarkyGrowth, NearAutarkySolveMatchesPerCountryFormula) {
  ModelParams raw = fixtures::paper_params(3);
  raw.alpha = 0.6;
  raw.L << 1.0, 0.8, 1.3;
  raw.T = fixtures::balanced_T(raw);
  raw.tau = fixtures::uniform_tau(3, 1e6);
  const ValidatedParams p = validate_params(raw);
  const SolveResult r = fixtures::solve(p, fixtures::near_autarky_config());
  const GrowthDecomposition gd = growth_rate(p, r.eq);
  const Vector aut = autarky_growth_rate(p, r.eq);
  for (Eigen::Index s = 0; s < 3; ++s) EXPECT_NEAR(gd.countries[static_cast<std::size_t>(s)].g, aut[s], 1e-6);
}

TEST(AutarkyGrowth, RejectsTradingEconomies) {
  const ValidatedParams p = validate_params(fixtures::figure_params(2.0));
  const SolveResult r = fixtures::solve(p);
  EXPECT_THROW(autarky_growth_rate(p, r.eq), Error);
}

TEST(ZeroGravityGrowth, TwoCountryAgreesWithPerCountryRates) {
  ModelParams raw = fixtures::paper_params(2);
  raw.T << 1.0, 1.4;
  raw.L << 1.0, 0.7;
  const ValidatedParams p = validate_params(raw);
  const SolveResult r = fixtures::solve(p);
  const GrowthDecomposition gd = growth_rate(p, r.eq);
  const double zg = zero_gravity_growth_rate(p, r.eq);
  for (const auto& c : gd.countries) EXPECT_NEAR(c.g, zg, 1e-8);
}

TEST(ZeroGravityGrowth, RequiresUnitCosts) {
  const ValidatedParams p = validate_params(fixtures::figure_params(1.5));
  const SolveResult r = fixtures::solve(p);
  try {
    zero_gravity_growth_rate(p, r.eq);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TauNotUniform);
  }
}

TEST(SymmetricGrowth, LimitsAndSolverAgreement) {
  ModelParams raw = fixtures::paper_params(3);
  raw.alpha = 0.6;
  const ValidatedParams p = validate_params(raw);
  const SolveResult zg = fixtures::solve(p);
  EXPECT_NEAR(symmetric_g_of_tau(p, 1.0), zero_gravity_growth_rate(p, zg.eq), 1e-8);

  ModelParams aut = raw;
  aut.tau = fixtures::uniform_tau(3, 1e6);
  const ValidatedParams pa = validate_params(aut);
  const SolveResult ra = fixtures::solve(pa);
  EXPECT_NEAR(symmetric_g_of_tau(p, 1e6), autarky_growth_rate(pa, ra.eq)[0], 1e-6);

  ModelParams mid = fixtures::paper_params(3);
  mid.tau = fixtures::uniform_tau(3, 1.7);
  const ValidatedParams pm = validate_params(mid);
  EXPECT_NEAR(symmetric_g_of_tau(pm, 1.7), fixtures::solve(pm).eq.g, 1e-9);
}

TEST(SymmetricGrowth, StrictlyDecreasingOnGrid) {
  const ValidatedParams p = validate_params(fixtures::paper_params(2));
  double prev = INFINITY;
  for (int i = 0; i <= 20; ++i) {
    const double g = symmetric_g_of_tau(p, 1.0 + 0.1 * i);
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Welfare, IdenticalEquilibriaGiveZero) {
  const ValidatedParams p = validate_params(fixtures::figure_params(1.5));
  const Equilibrium eq = fixtures::solve(p).eq;
  const WelfareReport w = welfare_decomposition(p, eq, p, eq);
  for (const auto& c : w.countries) {
    EXPECT_EQ(c.transitional, 0.0);
    EXPECT_EQ(c.static_total, 0.0);
    EXPECT_EQ(c.dynamic, 0.0);
    EXPECT_EQ(c.static_ek, 0.0);
    EXPECT_NEAR(c.static_romer, 0.0, 1e-14);
    EXPECT_FALSE(c.dynamic_share.has_value());
  }
}

TEST(Welfare, ComponentsMatchQuadratureForRandomShocks) {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> size(2, 5);
  std::uniform_real_distribution<double> cut(0.8, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams base = fixtures::random_instance(static_cast<std::size_t>(size(rng)), rng);
    Matrix next = base.tau;
    for (Eigen::Index s = 0; s < next.rows(); ++s) {
      for (Eigen::Index d = s + 1; d < next.cols(); ++d) next(s, d) = next(d, s) = std::max(1.0, next(s, d) * cut(rng));
    }
    const Pair pr = solve_pair(base, next);
    const WelfareReport w = welfare_decomposition(pr.base, pr.eq_base, pr.next, pr.eq_next);
    for (Eigen::Index s = 0; s < pr.base.n(); ++s) {
      const CountryWelfare& c = w.countries[static_cast<std::size_t>(s)];
      EXPECT_NEAR(c.transitional + c.static_total + c.dynamic, quadrature_welfare(pr, s), 1e-6) << "trial " << trial;
      EXPECT_NEAR(c.total, c.transitional + c.static_total + c.dynamic, 1e-10);
      EXPECT_NEAR(c.static_ek + c.static_romer, c.static_total, 1e-10);
    }
  }
}

TEST(Welfare, DomesticProductivityChangeKeepsSplitIdentity) {
  ModelParams base = fixtures::paper_params(3);
  base.tau = fixtures::uniform_tau(3, 2.0);
  ModelParams up = base;
  up.T[0] *= 1.1;
  const ValidatedParams a = validate_params(base);
  const ValidatedParams b = validate_params(up);
  const Equilibrium ea = fixtures::solve(a).eq;
  const Equilibrium eb = fixtures::solve(b).eq;
  const std::vector<StaticSplit> split = static_welfare_split(a, ea, b, eb);
  const WelfareReport w = welfare_decomposition(a, ea, b, eb);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_NEAR(split[s].ek + split[s].romer, w.countries[s].static_total, 1e-10);
    EXPECT_NE(split[s].romer, 0.0);
  }
}

TEST(Welfare, RejectsMismatchedCountries) {
  const ValidatedParams a = validate_params(fixtures::paper_params(2));
  const ValidatedParams b = validate_params(fixtures::paper_params(3));
  EXPECT_THROW(welfare_decomposition(a, fixtures::solve(a).eq, b, fixtures::solve(b).eq), Error);
}

TEST(Consumption, SymmetricCountriesConsumeEqually) {
  ModelParams raw = fixtures::paper_params(4);
  raw.tau = fixtures::uniform_tau(4, 2.0);
  const ValidatedParams p = validate_params(raw);
  const Vector c = consumption_level(p, fixtures::solve(p).eq);
  EXPECT_LT(c.maxCoeff() - c.minCoeff(), 1e-10);
}

TEST(Consumption, SingleCountryMatchesIncomeRoute) {
  // With one country, C = rho M/psi + wL/P must equal real income net of R&D
  // spending along the BGP: labor income plus profits minus g M / psi.
  const ValidatedParams p = validate_params(fixtures::paper_params(1));
  const Equilibrium eq = fixtures::solve(p).eq;
  const double c = consumption_level(p, eq)[0];
  const double real_income = (eq.w[0] * p.L()[0] + p.alpha() * eq.w[0] * p.L()[0]) / eq.P[0];
  EXPECT_NEAR(c, real_income - eq.g * eq.M[0] / p.psi(), 1e-12);
}

TEST(Consumption, RequiresConvergedEquilibrium) {
  const ValidatedParams p = validate_params(fixtures::paper_params(1));
  Equilibrium eq = fixtures::solve(p).eq;
  eq.converged = false;
  EXPECT_THROW(consumption_level(p, eq), Error);
}
