#include "tradegrowth/gravity.hpp"

#include <cmath>

#include "kernels.hpp"

namespace tradegrowth {

namespace {

void require_positive(const Vector& v, Eigen::Index n, const char* name) {
  if (v.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has the wrong length");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw Error(ErrorCode::NonPositiveParam, std::string(name) + " must be finite and positive");
    }
  }
}

Vector log_of(const Vector& v) { return v.array().log().matrix(); }

}  // namespace

Matrix monopolist_prices(const ValidatedParams& p, const Vector& P) {
  require_positive(P, p.n(), "P");
  Matrix out = p.tau();
  for (Eigen::Index k = 0; k < p.n(); ++k) out.row(k) *= P[k] / p.alpha();
  return out;
}

Vector composite_intermediate_prices(const ValidatedParams& p, const Vector& M, const Vector& P) {
  require_positive(M, p.n(), "M");
  require_positive(P, p.n(), "P");
  return detail::log_composite(p, log_of(M), log_of(P)).array().exp().matrix();
}

Vector final_price_index(const ValidatedParams& p, const Vector& w, const Vector& PM) {
  require_positive(w, p.n(), "w");
  require_positive(PM, p.n(), "PM");
  return detail::log_final_price(p, log_of(w), log_of(PM)).array().exp().matrix();
}

Matrix trade_shares_final(const ValidatedParams& p, const Vector& w, const Vector& PM) {
  require_positive(w, p.n(), "w");
  require_positive(PM, p.n(), "PM");
  return detail::softmax_cols(detail::final_logits(p, log_of(w), log_of(PM)));
}

Matrix trade_shares_intermediate(const ValidatedParams& p, const Vector& M, const Vector& P) {
  require_positive(M, p.n(), "M");
  require_positive(P, p.n(), "P");
  return detail::softmax_cols(detail::intermediate_logits(p, log_of(M), log_of(P)));
}

NationalAccounts national_accounts(const ValidatedParams& p, const Equilibrium& eq) {
  const double a = p.alpha();
  NationalAccounts acc;
  acc.labor_income = eq.w.cwiseProduct(p.L());
  acc.gross_output = acc.labor_income / (1.0 - a);
  acc.intermediate_revenue = a * (eq.shares.lambdaM * acc.gross_output);
  acc.profits = (1.0 - a) * acc.intermediate_revenue;
  acc.gdp = acc.labor_income + acc.profits;
  // Intermediates are produced one-for-one from final goods, so their input
  // cost is alpha times their revenue and absorption is GDP plus that cost.
  acc.absorption = acc.labor_income + acc.intermediate_revenue;
  return acc;
}

Vector goods_market_residual(const ValidatedParams& p, const Equilibrium& eq) {
  const NationalAccounts acc = national_accounts(p, eq);
  return acc.labor_income - (1.0 - p.alpha()) * (eq.shares.lambdaF * acc.absorption);
}

Vector trade_balance_residual(const ValidatedParams& p, const Equilibrium& eq) {
  const NationalAccounts acc = national_accounts(p, eq);
  const Matrix& lf = eq.shares.lambdaF;
  const Matrix& lm = eq.shares.lambdaM;
  const double a = p.alpha();
  const Eigen::Index n = p.n();
  Vector out(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    double exports = 0.0;
    for (Eigen::Index d = 0; d < n; ++d) {
      if (d == s) continue;
      exports += lf(s, d) * acc.absorption[d] + a * lm(s, d) * acc.gross_output[d];
    }
    // Off-diagonal column sums, written as sums rather than 1 - lambda_ss so that
    // near-autarky imports keep their relative precision.
    double lf_in = 0.0;
    double lm_in = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == s) continue;
      lf_in += lf(k, s);
      lm_in += lm(k, s);
    }
    const double imports = lf_in * acc.absorption[s] + a * lm_in * acc.gross_output[s];
    out[s] = exports - imports;
  }
  return out;
}

FlowTable final_goods_flows(const ValidatedParams& p, const Equilibrium& eq) {
  const NationalAccounts acc = national_accounts(p, eq);
  FlowTable ft;
  ft.flows = eq.shares.lambdaF * acc.absorption.asDiagonal();
  ft.labels = p.labels();
  return ft;
}

void refresh_prices_and_shares(const ValidatedParams& p, Equilibrium& eq) {
  const Vector logM = log_of(eq.M);
  const Vector logP = log_of(eq.P);
  const Vector logPM = detail::log_composite(p, logM, logP);
  eq.PM = logPM.array().exp().matrix();
  eq.shares.lambdaF = detail::softmax_cols(detail::final_logits(p, log_of(eq.w), logPM));
  eq.shares.lambdaM = detail::softmax_cols(detail::intermediate_logits(p, logM, logP));
}

}  // namespace tradegrowth
