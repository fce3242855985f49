#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tradegrowth/error.hpp"

namespace tradegrowth {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Exogenous inputs. Matrices are indexed (source, destination).
struct ModelParams {
  double theta = 0.0;  // Frechet shape, the trade elasticity
  double sigma = 0.0;  // CES elasticity across final varieties
  double alpha = 0.0;  // intermediate-goods share
  double rho = 0.0;    // time preference
  double psi = 0.0;    // R&D productivity
  Vector T;
  Vector L;
  Matrix tau;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return static_cast<std::size_t>(L.size()); }
};

// Parameters that passed validation, with the derived constants attached.
// Only validate_params can construct one, so every downstream function can
// assume the structural assumptions hold.
class ValidatedParams {
 public:
  const ModelParams& raw() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_.size(); }
  Eigen::Index n() const noexcept { return p_.L.size(); }

  double theta() const noexcept { return p_.theta; }
  double sigma() const noexcept { return p_.sigma; }
  double alpha() const noexcept { return p_.alpha; }
  double rho() const noexcept { return p_.rho; }
  double psi() const noexcept { return p_.psi; }
  const Vector& T() const noexcept { return p_.T; }
  const Vector& L() const noexcept { return p_.L; }
  const Matrix& tau() const noexcept { return p_.tau; }
  const std::vector<std::string>& labels() const noexcept { return p_.labels; }

  // eta = 1/(1-alpha); one_minus_eta is formed as -alpha/(1-alpha) so that it
  // keeps full relative precision when alpha is tiny.
  double eta() const noexcept { return eta_; }
  double one_minus_eta() const noexcept { return one_minus_eta_; }
  double gamma() const noexcept { return gamma_; }
  double log_gamma() const noexcept { return log_gamma_; }
  double log_alpha() const noexcept { return log_alpha_; }
  const Matrix& log_tau() const noexcept { return log_tau_; }
  const Vector& log_T() const noexcept { return log_T_; }

  // Non-fatal findings, e.g. sigma <= 1.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  friend ValidatedParams validate_params(const ModelParams& p);

 private:
  ValidatedParams() = default;

  ModelParams p_;
  double eta_ = 0.0;
  double one_minus_eta_ = 0.0;
  double gamma_ = 0.0;
  double log_gamma_ = 0.0;
  double log_alpha_ = 0.0;
  Matrix log_tau_;
  Vector log_T_;
  std::vector<std::string> warnings_;
};

// Checks every structural assumption and throws Error with one Issue per
// violation. Labels default to c1..cN when absent.
ValidatedParams validate_params(const ModelParams& p);

// Revalidating is the identity.
ValidatedParams validate_params(const ValidatedParams& p);

// gamma = Gamma((theta + 1 - sigma)/theta)^(1/(1-sigma)).
double gamma_constant(double theta, double sigma);

struct ShareMatrices {
  Matrix lambdaF;  // final goods, columns sum to one
  Matrix lambdaM;  // intermediate varieties, columns sum to one
};

struct Residuals {
  double inner = 0.0;
  double mid = 0.0;
  double outer = 0.0;
  long inner_iterations = 0;
  long mid_iterations = 0;
  long outer_iterations = 0;
  double goods_market = 0.0;
  double trade_balance = 0.0;
};

// Endogenous BGP state. Wages are normalized so that world labor income is one
// and variety measures so that they sum to one.
struct Equilibrium {
  Vector w;
  Vector P;
  Vector PM;
  Vector M;
  double R = 0.0;  // common real profit per variety, Pi_s / (P_s M_s)
  double g = 0.0;  // common growth rate psi * R - rho
  ShareMatrices shares;
  Residuals residuals;
  // Countries whose variety share sits at the lower bound because their
  // return to R&D stays below the common one (a corner of the BGP).
  std::vector<std::size_t> corner;
  bool converged = false;
};

// Bilateral final-goods expenditure E_sd, source in the row.
struct FlowTable {
  Matrix flows;
  std::vector<std::string> labels;
};

struct CountryWelfare {
  std::string label;
  double transitional = 0.0;
  double static_total = 0.0;
  double static_ek = 0.0;
  double static_romer = 0.0;
  double dynamic = 0.0;
  double total = 0.0;
  std::optional<double> dynamic_share;  // empty when |total| < 1e-9
  double log_M_hat = 0.0;               // naive transitional term, diagnostic only
};

struct WelfareReport {
  std::vector<CountryWelfare> countries;
  double g_base = 0.0;
  double g_new = 0.0;
};

}  // namespace tradegrowth
