#include <cmath>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <tradegrowth/model.hpp>

#include "support/fixtures.hpp"

using namespace tradegrowth;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

double big_gamma(const char* theta, const char* sigma) {
  const Big t(theta);
  const Big s(sigma);
  return static_cast<double>(pow(boost::math::tgamma((t + 1 - s) / t), 1 / (1 - s)));
}

ErrorCode first_code(const ModelParams& p) {
  try {
    validate_params(p);
  } catch (const Error& e) {
    return e.issues().empty() ? e.code() : e.issues().front().code;
  }
  ADD_FAILURE() << "expected a validation error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ValidateParams, PaperElasticitiesAreAccepted) {
  ModelParams p = fixtures::paper_params(2);
  p.tau << 1, 2, 2, 1;
  const ValidatedParams v = validate_params(p);
  EXPECT_DOUBLE_EQ(v.eta(), 1.5625);
  EXPECT_NEAR(v.one_minus_eta(), 1.0 - 1.5625, 1e-15);
  EXPECT_EQ(v.labels(), (std::vector<std::string>{"c1", "c2"}));
  EXPECT_FALSE(v.warnings().empty());  // sigma < 1
}

TEST(ValidateParams, AsymmetricTauIsRejected) {
  ModelParams p = fixtures::paper_params(2);
  p.tau << 1, 2, 3, 1;
  EXPECT_EQ(first_code(p), ErrorCode::AsymmetricTau);
}

TEST(ValidateParams, GammaDivergesWhenThetaPlusOneBelowSigma) {
  ModelParams p = fixtures::paper_params(1);
  p.theta = 1.0;
  p.sigma = 2.5;
  EXPECT_EQ(first_code(p), ErrorCode::GammaDiverges);
}

TEST(ValidateParams, OtherStructuralViolations) {
  ModelParams p = fixtures::paper_params(2);
  p.tau << 1, 0.9, 0.9, 1;
  EXPECT_EQ(first_code(p), ErrorCode::TauBelowOne);
  p.tau << 1.1, 2, 2, 1;
  EXPECT_EQ(first_code(p), ErrorCode::DiagonalTauNotOne);
  p = fixtures::paper_params(2);
  p.L[1] = 0.0;
  EXPECT_EQ(first_code(p), ErrorCode::NonPositiveParam);
  p = fixtures::paper_params(2);
  p.T.resize(3);
  p.T.setOnes();
  EXPECT_EQ(first_code(p), ErrorCode::DimensionMismatch);
  p = fixtures::paper_params(2);
  p.alpha = 1.0;
  EXPECT_EQ(first_code(p), ErrorCode::NonPositiveParam);
}

TEST(ValidateParams, ReportsEveryViolation) {
  ModelParams p = fixtures::paper_params(2);
  p.tau << 1, 0.5, 2, 1;
  p.rho = -1.0;
  try {
    validate_params(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_GE(e.issues().size(), 3u);
  }
}

TEST(ValidateParams, RevalidationIsIdentity) {
  ModelParams p = fixtures::paper_params(3);
  p.tau = fixtures::uniform_tau(3, 1.7);
  p.labels = {"a", "b", "c"};
  const ValidatedParams v = validate_params(p);
  const ValidatedParams again = validate_params(v);
  EXPECT_EQ(again.tau(), v.tau());
  EXPECT_EQ(again.labels(), v.labels());
  EXPECT_EQ(again.gamma(), v.gamma());
  EXPECT_EQ(again.log_tau(), v.log_tau());
}

TEST(GammaConstant, GammaOfTwoIsOne) { EXPECT_NEAR(gamma_constant(1.0, 0.0), 1.0, 1e-15); }

TEST(GammaConstant, MatchesFiftyDigitReference) {
  EXPECT_NEAR(gamma_constant(2.12, 0.76), big_gamma("2.12", "0.76"), 1e-14);
  EXPECT_NEAR(gamma_constant(4.0, 0.76), big_gamma("4", "0.76"), 1e-14);
  // Frozen from the same reference.
  EXPECT_NEAR(gamma_constant(2.12, 0.76), 0.79405404141673769402, 1e-14);
  EXPECT_NEAR(gamma_constant(4.0, 0.76), 0.87606625530556652327, 1e-14);
}

TEST(GammaConstant, LargeExponentStaysFinite) {
  // sigma close to one sends 1/(1-sigma) to 1e6.
  const double g = gamma_constant(2.12, 1.0 - 1e-6);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_GT(g, 0.0);
}
