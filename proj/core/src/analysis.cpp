#include "tradegrowth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels.hpp"

namespace tradegrowth {

namespace {

// gamma^(-1/(1-alpha)) alpha^(alpha/(1-alpha)), the constant in the real-wage identity
// w/P = kappa (T/lambdaF_ss)^(1/(theta(1-alpha))) M/lambdaM_ss.
double log_kappa(const ValidatedParams& p) {
  const double a = p.alpha();
  return (-p.log_gamma() + a * p.log_alpha()) / (1.0 - a);
}

void require_same_countries(const ValidatedParams& a, const ValidatedParams& b) {
  if (a.n() != b.n() || a.labels() != b.labels()) {
    throw Error(ErrorCode::CountryMismatch, "the two equilibria cover different country sets");
  }
  if (a.alpha() != b.alpha() || a.theta() != b.theta() || a.rho() != b.rho() || a.psi() != b.psi() ||
      a.sigma() != b.sigma()) {
    throw Error(ErrorCode::InvalidArgument, "welfare comparisons require identical scalar parameters");
  }
}

void require_equilibrium(const ValidatedParams& p, const Equilibrium& eq) {
  const Eigen::Index n = p.n();
  if (eq.w.size() != n || eq.P.size() != n || eq.M.size() != n || eq.shares.lambdaF.rows() != n ||
      eq.shares.lambdaM.rows() != n) {
    throw Error(ErrorCode::CountryMismatch, "equilibrium does not match the parameter dimensions");
  }
  if (!((eq.M.array() > 0.0).all() && (eq.w.array() > 0.0).all() && (eq.P.array() > 0.0).all())) {
    throw Error(ErrorCode::NonPositiveParam, "equilibrium has non-positive wages, prices, or measures");
  }
}

bool is_corner(const Equilibrium& eq, std::size_t s) {
  return std::find(eq.corner.begin(), eq.corner.end(), s) != eq.corner.end();
}

}  // namespace

GrowthDecomposition growth_rate(const ValidatedParams& p, const Equilibrium& eq) {
  require_equilibrium(p, eq);
  if (!eq.converged) throw Error(ErrorCode::NotConverged, "growth_rate needs a converged equilibrium");

  const Eigen::Index n = p.n();
  const double a = p.alpha();
  const double psi = p.psi();
  const double rho = p.rho();
  const double kappa = std::exp(log_kappa(p));
  const Vector v = eq.w.cwiseProduct(p.L());
  const Vector X = v / (1.0 - a);
  const Matrix& lf = eq.shares.lambdaF;
  const Matrix& lm = eq.shares.lambdaM;

  GrowthDecomposition out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index s = 0; s < n; ++s) {
    CountryGrowth c;
    const double PM = eq.P[s] * eq.M[s];
    c.return_per_variety = a * lm.row(s).dot(v) / PM;
    c.g = psi * c.return_per_variety - rho;
    c.ek_factor = std::exp((p.log_T()[s] - std::log(lf(s, s))) / (p.theta() * (1.0 - a)));
    c.domestic_size = p.L()[s];
    c.romer_domestic = psi * a * kappa * c.ek_factor * c.domestic_size;
    double foreign = 0.0;
    for (Eigen::Index d = 0; d < n; ++d) {
      if (d != s) foreign += lm(s, d) * v[d];
    }
    c.romer_global = psi * a * foreign / PM;

    const double alpha_pow = std::exp(p.one_minus_eta() * p.log_alpha());
    c.printed_labor_term_no_alpha = psi * rho * c.ek_factor * p.L()[s] / lm(s, s);
    c.printed_labor_term = alpha_pow * c.printed_labor_term_no_alpha;
    c.printed_global_term = psi * rho * (a / p.eta()) * lm.row(s).dot(X) / PM;
    c.printed_total = c.printed_labor_term + c.printed_global_term;

    c.corner = is_corner(eq, static_cast<std::size_t>(s));
    if (!c.corner) {
      lo = std::min(lo, c.g);
      hi = std::max(hi, c.g);
    }
    out.countries.push_back(c);
  }
  out.g_common = eq.g;
  out.dispersion = hi - lo;
  return out;
}

double autarky_growth_rate(double alpha, double psi, double rho, double Y_over_M) {
  const double eta = 1.0 / (1.0 - alpha);
  return alpha * psi / eta * Y_over_M - rho;
}

Vector autarky_growth_rate(const ValidatedParams& p, const Equilibrium& eq) {
  require_equilibrium(p, eq);
  const Eigen::Index n = p.n();
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index d = 0; d < n; ++d) {
      if (s != d && (eq.shares.lambdaF(s, d) >= 1e-6 || eq.shares.lambdaM(s, d) >= 1e-6)) {
        throw Error(ErrorCode::InvalidArgument,
                    "autarky formula needs off-diagonal shares below 1e-6; lambda[" + std::to_string(s) + "][" +
                        std::to_string(d) + "] is larger");
      }
    }
  }
  Vector g(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double Y = eq.w[s] * p.L()[s] / ((1.0 - p.alpha()) * eq.P[s]);
    g[s] = autarky_growth_rate(p.alpha(), p.psi(), p.rho(), Y / eq.M[s]);
  }
  return g;
}

double zero_gravity_growth_rate(const ValidatedParams& p, const Equilibrium& eq) {
  require_equilibrium(p, eq);
  if ((p.tau().array() != 1.0).any()) {
    throw Error(ErrorCode::TauNotUniform, "zero-gravity formula needs tau = 1 everywhere");
  }
  double Y = 0.0;
  for (Eigen::Index d = 0; d < p.n(); ++d) Y += eq.w[d] * p.L()[d] / ((1.0 - p.alpha()) * eq.P[d]);
  return autarky_growth_rate(p.alpha(), p.psi(), p.rho(), Y / eq.M.sum());
}

double symmetric_g_of_tau(const ValidatedParams& p, double tau) {
  if (!(tau >= 1.0) || !std::isfinite(tau)) throw Error(ErrorCode::TauBelowOne, "tau must be finite and >= 1");
  const auto equal = [](const Vector& v) { return (v.array() == v[0]).all(); };
  if (!equal(p.T()) || !equal(p.L())) {
    throw Error(ErrorCode::InvalidArgument, "symmetric_g_of_tau needs equal T and L across countries");
  }
  const double a = p.alpha();
  const double n1 = static_cast<double>(p.n() - 1);
  const double log_tau = std::log(tau);
  const double ek = (p.log_T()[0] + std::log1p(n1 * std::exp(-p.theta() * log_tau))) / (p.theta() * (1.0 - a));
  const double romer = std::log1p(n1 * std::exp(p.one_minus_eta() * log_tau));
  return p.psi() * a * std::exp(log_kappa(p) + ek + romer) * p.L()[0] - p.rho();
}

std::vector<StaticSplit> static_welfare_split(const ValidatedParams& p_base, const Equilibrium& eq_base,
                                              const ValidatedParams& p_new, const Equilibrium& eq_new) {
  require_same_countries(p_base, p_new);
  require_equilibrium(p_base, eq_base);
  require_equilibrium(p_new, eq_new);
  const Eigen::Index n = p_base.n();
  const double a = p_base.alpha();
  const double rho = p_base.rho();
  const double ome = p_base.one_minus_eta();
  const Vector log_P_hat = (eq_new.P.array().log() - eq_base.P.array().log()).matrix();
  const Vector log_M_hat = (eq_new.M.array().log() - eq_base.M.array().log()).matrix();
  const Matrix log_tau_hat = p_new.log_tau() - p_base.log_tau();

  std::vector<StaticSplit> out(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) {
    StaticSplit& r = out[static_cast<std::size_t>(s)];
    const double log_T_hat = p_new.log_T()[s] - p_base.log_T()[s];
    const double log_lf_hat = std::log(eq_new.shares.lambdaF(s, s)) - std::log(eq_base.shares.lambdaF(s, s));
    r.ek = (log_T_hat - log_lf_hat) / (rho * p_base.theta() * (1.0 - a));

    // mu_k is the base intermediate share of k in s; the sum is the change in
    // the effective measure of varieties relative to the domestic price.
    Vector terms(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      terms[k] = std::log(eq_base.shares.lambdaM(k, s)) + log_M_hat[k] +
                 ome * (log_tau_hat(k, s) + log_P_hat[k] - log_P_hat[s]);
    }
    const double log_sum = detail::log_sum_exp(terms);
    r.romer = log_sum / rho;
    r.romer_printed = log_sum / (rho * p_base.eta());
  }
  return out;
}

WelfareReport welfare_decomposition(const ValidatedParams& p_base, const Equilibrium& eq_base,
                                    const ValidatedParams& p_new, const Equilibrium& eq_new) {
  const std::vector<StaticSplit> split = static_welfare_split(p_base, eq_base, p_new, eq_new);
  const Eigen::Index n = p_base.n();
  const double rho = p_base.rho();
  const double psi = p_base.psi();

  WelfareReport rep;
  rep.g_base = eq_base.g;
  rep.g_new = eq_new.g;
  const double dynamic = (eq_new.g - eq_base.g) / (rho * rho);
  for (Eigen::Index s = 0; s < n; ++s) {
    CountryWelfare c;
    c.label = p_base.labels()[static_cast<std::size_t>(s)];
    const double L = p_base.L()[s];
    const double rw_base = eq_base.w[s] * L / (eq_base.P[s] * eq_base.M[s]);
    const double rw_new = eq_new.w[s] * L / (eq_new.P[s] * eq_new.M[s]);
    c.transitional = (std::log1p(rho / (psi * rw_new)) - std::log1p(rho / (psi * rw_base))) / rho;
    c.static_total = (std::log(eq_new.w[s] / eq_base.w[s]) - std::log(eq_new.P[s] / eq_base.P[s])) / rho;
    c.static_ek = split[static_cast<std::size_t>(s)].ek;
    c.static_romer = split[static_cast<std::size_t>(s)].romer;
    c.dynamic = dynamic;
    c.total = c.transitional + c.static_total + c.dynamic;
    if (std::abs(c.total) >= 1e-9) c.dynamic_share = c.dynamic / c.total;
    c.log_M_hat = std::log(eq_new.M[s] / eq_base.M[s]);
    rep.countries.push_back(std::move(c));
  }
  return rep;
}

Vector consumption_level(const ValidatedParams& p, const Equilibrium& eq) {
  require_equilibrium(p, eq);
  if (!eq.converged) throw Error(ErrorCode::NotConverged, "consumption_level needs a converged equilibrium");
  const Vector real_labor = eq.w.cwiseProduct(p.L()).cwiseQuotient(eq.P);
  return (p.rho() / p.psi()) * eq.M + real_labor;
}

}  // namespace tradegrowth
