#include "tradegrowth/model.hpp"

#include <cmath>
#include <sstream>

namespace tradegrowth {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AsymmetricTau: return "AsymmetricTau";
    case ErrorCode::DiagonalTauNotOne: return "DiagonalTauNotOne";
    case ErrorCode::TauBelowOne: return "TauBelowOne";
    case ErrorCode::GammaDiverges: return "GammaDiverges";
    case ErrorCode::NonPositiveParam: return "NonPositiveParam";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::TauNotUniform: return "TauNotUniform";
    case ErrorCode::CountryMismatch: return "CountryMismatch";
    case ErrorCode::ZeroDiagonalFlow: return "ZeroDiagonalFlow";
    case ErrorCode::NegativeFlow: return "NegativeFlow";
    case ErrorCode::SearchFailed: return "SearchFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::string join_issues(const std::vector<Issue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << to_string(issues[i].code) << ": " << issues[i].message;
  }
  return os.str();
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      issues_{{code, message}} {}

Error::Error(std::vector<Issue> issues)
    : std::runtime_error(join_issues(issues)),
      code_(issues.empty() ? ErrorCode::InvalidArgument : issues.front().code),
      issues_(std::move(issues)) {}

double gamma_constant(double theta, double sigma) {
  if (!(theta > 0.0)) throw Error(ErrorCode::NonPositiveParam, "theta must be positive");
  const double arg = (theta + 1.0 - sigma) / theta;
  if (!(theta + 1.0 - sigma > 0.0)) {
    throw Error(ErrorCode::GammaDiverges, "theta + 1 - sigma must be positive");
  }
  if (sigma == 1.0) {
    throw Error(ErrorCode::GammaDiverges, "sigma = 1 makes the exponent 1/(1-sigma) undefined");
  }
  // lgamma keeps the relative accuracy that a tgamma-then-pow route loses when
  // the exponent 1/(1-sigma) is large.
  return std::exp(std::lgamma(arg) / (1.0 - sigma));
}

ValidatedParams validate_params(const ModelParams& p) {
  std::vector<Issue> issues;
  auto issue = [&](ErrorCode c, std::string m) { issues.push_back({c, std::move(m)}); };

  const auto scalar = [&](const char* name, double v) {
    if (!std::isfinite(v)) {
      issue(ErrorCode::NonFiniteValue, std::string(name) + " is not finite");
    } else if (!(v > 0.0)) {
      issue(ErrorCode::NonPositiveParam, std::string(name) + " must be positive");
    }
  };
  scalar("theta", p.theta);
  scalar("sigma", p.sigma);
  scalar("alpha", p.alpha);
  scalar("rho", p.rho);
  scalar("psi", p.psi);
  if (std::isfinite(p.alpha) && p.alpha >= 1.0) {
    issue(ErrorCode::NonPositiveParam, "alpha must lie in (0,1)");
  }
  if (std::isfinite(p.theta) && std::isfinite(p.sigma) && p.theta > 0.0) {
    if (!(p.theta + 1.0 - p.sigma > 0.0)) {
      issue(ErrorCode::GammaDiverges, "theta + 1 - sigma must be positive");
    } else if (p.sigma == 1.0) {
      issue(ErrorCode::GammaDiverges, "sigma = 1 is not admissible");
    }
  }

  const Eigen::Index n = p.L.size();
  if (n < 1) issue(ErrorCode::DimensionMismatch, "need at least one country");
  if (p.T.size() != n) {
    issue(ErrorCode::DimensionMismatch,
          "T has " + std::to_string(p.T.size()) + " entries, L has " + std::to_string(n));
  }
  if (p.tau.rows() != n || p.tau.cols() != n) {
    issue(ErrorCode::DimensionMismatch, "tau must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!p.labels.empty() && static_cast<Eigen::Index>(p.labels.size()) != n) {
    issue(ErrorCode::DimensionMismatch, "labels must have one entry per country");
  }

  for (Eigen::Index i = 0; i < p.L.size(); ++i) {
    if (!std::isfinite(p.L[i]) || !(p.L[i] > 0.0)) {
      issue(ErrorCode::NonPositiveParam, "L[" + std::to_string(i) + "] must be positive");
    }
  }
  for (Eigen::Index i = 0; i < p.T.size(); ++i) {
    if (!std::isfinite(p.T[i]) || !(p.T[i] > 0.0)) {
      issue(ErrorCode::NonPositiveParam, "T[" + std::to_string(i) + "] must be positive");
    }
  }

  if (p.tau.rows() == n && p.tau.cols() == n) {
    for (Eigen::Index s = 0; s < n; ++s) {
      if (p.tau(s, s) != 1.0) {
        issue(ErrorCode::DiagonalTauNotOne, "tau[" + std::to_string(s) + "][" + std::to_string(s) + "] must be 1");
      }
      for (Eigen::Index d = 0; d < n; ++d) {
        const double t = p.tau(s, d);
        const std::string at = "[" + std::to_string(s) + "][" + std::to_string(d) + "]";
        if (!std::isfinite(t)) {
          issue(ErrorCode::NonFiniteValue, "tau" + at + " is not finite");
        } else if (t < 1.0) {
          issue(ErrorCode::TauBelowOne, "tau" + at + " = " + std::to_string(t) + " is below 1");
        }
        if (d > s && t != p.tau(d, s)) {
          issue(ErrorCode::AsymmetricTau, "tau" + at + " differs from its transpose");
        }
      }
    }
  }

  if (!issues.empty()) throw Error(std::move(issues));

  ValidatedParams v;
  v.p_ = p;
  if (v.p_.labels.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) v.p_.labels.push_back("c" + std::to_string(i + 1));
  }
  v.eta_ = 1.0 / (1.0 - p.alpha);
  v.one_minus_eta_ = -p.alpha / (1.0 - p.alpha);
  v.gamma_ = gamma_constant(p.theta, p.sigma);
  v.log_gamma_ = std::log(v.gamma_);
  v.log_alpha_ = std::log(p.alpha);
  v.log_tau_ = p.tau.array().log().matrix();
  v.log_T_ = p.T.array().log().matrix();
  if (p.sigma <= 1.0) {
    v.warnings_.push_back("sigma = " + std::to_string(p.sigma) +
                          " <= 1; final varieties are complements. The solver only uses sigma through gamma.");
  }
  return v;
}

ValidatedParams validate_params(const ValidatedParams& p) { return validate_params(p.raw()); }

}  // namespace tradegrowth
