#pragma once

#include "tradegrowth/model.hpp"

namespace tradegrowth {

// p^M_kd = tau_kd P_k / alpha.
Matrix monopolist_prices(const ValidatedParams& p, const Vector& P);

// P^M_d = (sum_k M_k (p^M_kd)^(1-eta))^(1/(1-eta)).
Vector composite_intermediate_prices(const ValidatedParams& p, const Vector& M, const Vector& P);

// P_d = gamma (sum_s T_s (tau_sd (P^M_s)^alpha w_s^(1-alpha))^(-theta))^(-1/theta).
Vector final_price_index(const ValidatedParams& p, const Vector& w, const Vector& PM);

// Eaton-Kortum shares lambda^F_sd.
Matrix trade_shares_final(const ValidatedParams& p, const Vector& w, const Vector& PM);

// lambda^M_sd = M_s (p^M_sd)^(1-eta) / sum_k M_k (p^M_kd)^(1-eta).
Matrix trade_shares_intermediate(const ValidatedParams& p, const Vector& M, const Vector& P);

// Nominal aggregates implied by wages and intermediate shares, with world labor
// income as the unit of account.
struct NationalAccounts {
  Vector labor_income;           // w_s L_s
  Vector gross_output;           // value of final output, w_s L_s / (1 - alpha)
  Vector intermediate_revenue;   // alpha * sum_d lambda^M_sd * gross_output_d
  Vector profits;                // (1 - alpha) * intermediate_revenue
  Vector gdp;                    // labor income plus profits
  Vector absorption;             // spending on final goods: gdp + input cost of intermediates
};

NationalAccounts national_accounts(const ValidatedParams& p, const Equilibrium& eq);

// Labor income minus the labor share of final-goods sales,
// w_s L_s - (1-alpha) sum_d lambda^F_sd E_d. Zero at an equilibrium.
Vector goods_market_residual(const ValidatedParams& p, const Equilibrium& eq);

// Exports minus imports of final and intermediate goods per country.
Vector trade_balance_residual(const ValidatedParams& p, const Equilibrium& eq);

// Bilateral final-goods expenditure lambda^F_sd E_d.
FlowTable final_goods_flows(const ValidatedParams& p, const Equilibrium& eq);

// Recomputes PM and both share matrices of eq from (w, M, P). Used after an
// equilibrium's fields are edited by hand.
void refresh_prices_and_shares(const ValidatedParams& p, Equilibrium& eq);

}  // namespace tradegrowth
