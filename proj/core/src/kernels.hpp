#pragma once

// Log-space evaluation of the price and share objects. Everything the solver
// iterates on goes through here so that tau = 1e6 and alpha = 1e-8 stay finite.

#include <cmath>

#include "tradegrowth/model.hpp"

namespace tradegrowth::detail {

inline double log_sum_exp(const Eigen::Ref<const Vector>& a) {
  const double m = a.maxCoeff();
  return m + std::log((a.array() - m).exp().sum());
}

inline Vector log_sum_exp_cols(const Matrix& a) {
  Vector out(a.cols());
  for (Eigen::Index d = 0; d < a.cols(); ++d) out[d] = log_sum_exp(a.col(d));
  return out;
}

// Columns of exp(a) normalized to sum to one, shifted by the column max first.
inline Matrix softmax_cols(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index d = 0; d < a.cols(); ++d) {
    const double m = a.col(d).maxCoeff();
    out.col(d) = (a.col(d).array() - m).exp().matrix();
    out.col(d) /= out.col(d).sum();
  }
  return out;
}

// (1-eta) * log p^M_kd, where p^M_kd = tau_kd P_k / alpha.
inline Matrix scaled_log_markup_prices(const ValidatedParams& p, const Vector& logP) {
  const Eigen::Index n = p.n();
  Matrix c(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index d = 0; d < n; ++d) {
      c(k, d) = p.one_minus_eta() * (p.log_tau()(k, d) + logP[k] - p.log_alpha());
    }
  }
  return c;
}

// Share numerators log(M_k (p^M_kd)^(1-eta)).
inline Matrix intermediate_logits(const ValidatedParams& p, const Vector& logM, const Vector& logP) {
  Matrix a = scaled_log_markup_prices(p, logP);
  a.colwise() += logM;
  return a;
}

// log P^M_d = log(sum_k M_k (p^M_kd)^(1-eta)) / (1-eta).
//
// For small alpha the exponent 1-eta is tiny and the sum is close to sum M, so
// the division would amplify rounding. Splitting off log(sum M) and using
// log1p/expm1 on the remainder keeps the quotient accurate.
inline Vector log_composite(const ValidatedParams& p, const Vector& logM, const Vector& logP) {
  const Eigen::Index n = p.n();
  const Matrix c = scaled_log_markup_prices(p, logP);
  const double lse_m = log_sum_exp(logM);
  const Vector weights = (logM.array() - lse_m).exp().matrix();
  Vector out(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    double rest;
    if (c.col(d).cwiseAbs().maxCoeff() < 0.5) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) s += weights[k] * std::expm1(c(k, d));
      rest = std::log1p(s);
    } else {
      rest = log_sum_exp(c.col(d) + (logM.array() - lse_m).matrix());
    }
    out[d] = (lse_m + rest) / p.one_minus_eta();
  }
  return out;
}

// log(T_s (tau_sd (P^M_s)^alpha w_s^(1-alpha))^(-theta)).
inline Matrix final_logits(const ValidatedParams& p, const Vector& logw, const Vector& logPM) {
  const Eigen::Index n = p.n();
  const double a = p.alpha();
  Matrix b(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double log_cost = a * logPM[s] + (1.0 - a) * logw[s];
    for (Eigen::Index d = 0; d < n; ++d) {
      b(s, d) = p.log_T()[s] - p.theta() * (log_cost + p.log_tau()(s, d));
    }
  }
  return b;
}

inline Vector log_final_price(const ValidatedParams& p, const Vector& logw, const Vector& logPM) {
  return (p.log_gamma() - log_sum_exp_cols(final_logits(p, logw, logPM)).array() / p.theta()).matrix();
}

}  // namespace tradegrowth::detail
