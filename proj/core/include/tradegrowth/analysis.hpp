#pragma once

#include <vector>

#include "tradegrowth/model.hpp"

namespace tradegrowth {

// Per-country growth and its components.
//
// The return to R&D in s is real profit per variety, so
//   g_s + rho = psi * Pi_s / (P_s M_s)
//             = psi*alpha*kappa*(T_s/lambdaF_ss)^(1/(theta(1-alpha)))*L_s     (domestic sales)
//             + psi*alpha*sum_{d != s} lambdaM_sd w_d L_d / (P_s M_s)          (foreign sales)
// with kappa = gamma^(-1/(1-alpha)) alpha^(alpha/(1-alpha)). The first line is the
// Eaton-Kortum factor times domestic market size, the second is global market access.
struct CountryGrowth {
  double g = 0.0;
  double return_per_variety = 0.0;
  double ek_factor = 0.0;           // (T_s / lambdaF_ss)^(1/(theta(1-alpha)))
  double domestic_size = 0.0;       // L_s
  double romer_domestic = 0.0;      // domestic-sales term of g + rho
  double romer_global = 0.0;        // foreign-sales term of g + rho
  // Bracket formula as printed in the source text, for comparison only. These
  // do not add up to g; see the README.
  double printed_labor_term = 0.0;  // psi rho EK alpha^(1-eta) L_s / lambdaM_ss
  double printed_labor_term_no_alpha = 0.0;
  double printed_global_term = 0.0;  // psi rho (alpha/eta) sum_d lambdaM_sd P_d Y_d / (P_s M_s)
  double printed_total = 0.0;
  bool corner = false;
};

struct GrowthDecomposition {
  std::vector<CountryGrowth> countries;
  double g_common = 0.0;
  double dispersion = 0.0;  // max - min of g over interior countries
};

// Throws Error(NotConverged) unless eq.converged.
GrowthDecomposition growth_rate(const ValidatedParams& p, const Equilibrium& eq);

// g = (alpha psi / eta) (Y / M) - rho.
double autarky_growth_rate(double alpha, double psi, double rho, double Y_over_M);

// Per-country autarky formula evaluated at eq. Requires N = 1 or every
// off-diagonal share below 1e-6, otherwise throws InvalidArgument.
Vector autarky_growth_rate(const ValidatedParams& p, const Equilibrium& eq);

// g = (alpha psi / eta) (sum Y / sum M) - rho; throws TauNotUniform unless tau = 1.
double zero_gravity_growth_rate(const ValidatedParams& p, const Equilibrium& eq);

// Closed form for N symmetric countries (equal T and L) with common
// off-diagonal cost tau:
//   g = psi alpha kappa (T (1+(N-1)tau^-theta))^(1/(theta(1-alpha))) L (1+(N-1)tau^(1-eta)) - rho.
double symmetric_g_of_tau(const ValidatedParams& p, double tau);

struct StaticSplit {
  double ek = 0.0;             // (1/rho)(1/(theta(1-alpha))) log(T_hat / lambdaF_ss_hat)
  double romer = 0.0;          // (1/rho) log sum_k mu_k M_hat_k (p_hat_ks / P_hat_s)^(1-eta)
  double romer_printed = 0.0;  // same log-sum scaled by 1/(rho eta), diagnostic only
};

// Splits (1/rho) log(w_hat/P_hat) into Eaton-Kortum and Romer parts.
std::vector<StaticSplit> static_welfare_split(const ValidatedParams& p_base, const Equilibrium& eq_base,
                                              const ValidatedParams& p_new, const Equilibrium& eq_new);

// Welfare change between two BGPs compared at the same instant, both with
// variety measures summing to one:
//   transitional = (1/rho) log[(1 + rho/(psi Rw_new)) / (1 + rho/(psi Rw_base))], Rw = wL/(PM)
//   static       = (1/rho) log(w_hat / P_hat)
//   dynamic      = (g_new - g_base) / rho^2
// The three add up to (1/rho) log(C_hat) + (g_new - g_base)/rho^2.
WelfareReport welfare_decomposition(const ValidatedParams& p_base, const Equilibrium& eq_base,
                                    const ValidatedParams& p_new, const Equilibrium& eq_new);

// C = rho M / psi + w L / P.
Vector consumption_level(const ValidatedParams& p, const Equilibrium& eq);

}  // namespace tradegrowth
