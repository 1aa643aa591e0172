#pragma once

#include <cmath>
#include <vector>

#include "treewalk/arith.hpp"
#include "treewalk/exact.hpp"
#include "treewalk/model.hpp"

namespace treewalk {

inline constexpr double kPi = 3.14159265358979323846264338;

/// Truncated power series; coefficients[k] multiplies z^k.
template <class Real>
struct PowerSeries {
  std::vector<Real> coefficients;
  int order() const { return static_cast<int>(coefficients.size()) - 1; }
};

/// Catalan generating function sum c_k x^k on [-1/4, 1/4], evaluated in the
/// cancellation-free form 2/(1 + sqrt(1-4x)); the value at x = 0 is 1.
inline double catalan_gf(double x) {
  if (!std::isfinite(x) || std::abs(x) > 0.25)
    throw Error(ErrorCode::DomainError, "catalan_gf needs |x| <= 1/4");
  return 2.0 / (1.0 + std::sqrt(1.0 - 4.0 * x));
}

/// Radius of convergence of the first-return generating function,
/// (d-1+lambda)/(2*sqrt(lambda*(d-1))). This is 1/rho on the transient and
/// critical range and exceeds 1 on the recurrent range.
inline double genfun_radius(const WalkParams& params) {
  const double dm1 = params.degree() - 1;
  const double lambda = params.lambda();
  return (dm1 + lambda) / (2.0 * std::sqrt(lambda * dm1));
}

namespace detail {

// Discriminant (d-1+lambda)^2 - 4*lambda*(d-1)*z^2, clamped at zero so that
// evaluation exactly on the convergence boundary stays in domain.
inline double kernel_discriminant(const WalkParams& params, double z) {
  const double dm1 = params.degree() - 1;
  const double lambda = params.lambda();
  const double s = dm1 + lambda;
  const double disc = s * s - 4.0 * lambda * dm1 * z * z;
  return disc < 0.0 ? 0.0 : disc;
}

inline void check_radius(const WalkParams& params, double z) {
  const double r = genfun_radius(params);
  if (!std::isfinite(z) || std::abs(z) > r * (1.0 + 4e-16))
    throw Error(ErrorCode::DomainError, "z outside the convergence radius");
}

}  // namespace detail

/// First-return generating function U(o,o|z) in closed form.
inline double u_closed(const WalkParams& params, double z) {
  detail::check_radius(params, z);
  const double dm1 = params.degree() - 1;
  const double s = dm1 + params.lambda();
  return (s - std::sqrt(detail::kernel_discriminant(params, z))) / (2.0 * dm1);
}

/// Green function G(o,o|z) = 1/(1 - U(o,o|z)) in closed form. Valid while the
/// denominator stays positive: up to and including 1/rho in the transient
/// regime, strictly inside |z| < 1 at and above the critical bias.
inline double g_closed(const WalkParams& params, double z) {
  detail::check_radius(params, z);
  const double dm1 = params.degree() - 1;
  const double s = dm1 + params.lambda();
  const double denom = 2.0 * dm1 - s + std::sqrt(detail::kernel_discriminant(params, z));
  if (denom <= 0.0) throw Error(ErrorCode::DomainError, "z outside the Green function domain");
  return 2.0 * dm1 / denom;
}

/// Coefficients t_k of sqrt(1-w) = sum t_k w^k, through the given order,
/// by the two-term ratio recurrence (no factorials).
template <class Real>
std::vector<Real> sqrt_one_minus_series(int order) {
  std::vector<Real> t(static_cast<std::size_t>(order) + 1, Real(0));
  t[0] = Real(1);
  if (order >= 1) t[1] = Real(-1) / Real(2);
  for (int k = 2; k <= order; ++k) t[k] = t[k - 1] * Real(2 * k - 3) / Real(2 * k);
  return t;
}

/// Power-series expansion of U: odd coefficients vanish and the z^(2n)
/// coefficient is the 2n-step first-return probability. Expanded from the
/// closed form through the binomial series of sqrt(1-w) with w =
/// (rho_formula * z)^2.
template <class Real>
PowerSeries<Real> series_u(const WalkParams& params, int order) {
  if (order < 0) throw Error(ErrorCode::DomainError, "order must be nonnegative");
  const Real lambda = params.template lambda_as<Real>();
  const Real dm1 = Real(params.degree() - 1);
  const Real s = dm1 + lambda;
  const Real rho_sq = Real(4) * lambda * dm1 / (s * s);
  const Real prefactor = s / (Real(2) * dm1);

  PowerSeries<Real> u{std::vector<Real>(static_cast<std::size_t>(order) + 1, Real(0))};
  // u[2k] = prefactor * (-t_k) * rho_sq^k; accumulate the product iteratively.
  Real acc = prefactor * (Real(1) / Real(2)) * rho_sq;  // k = 1 term
  for (int k = 1; 2 * k <= order; ++k) {
    if (k >= 2) acc = acc * rho_sq * Real(2 * k - 3) / Real(2 * k);
    u.coefficients[2 * k] = acc;
  }
  return u;
}

/// Power-series expansion of the Green function, computed by formal division
/// 1/(1 - U): g[0] = 1, g[n] = sum_{k} u[k] g[n-k]. The z^n coefficient is
/// p^(n)(o,o).
template <class Real>
PowerSeries<Real> series_g(const WalkParams& params, int order) {
  const PowerSeries<Real> u = series_u<Real>(params, order);
  PowerSeries<Real> g{std::vector<Real>(static_cast<std::size_t>(order) + 1, Real(0))};
  g.coefficients[0] = Real(1);
  for (int n = 2; n <= order; n += 2) {
    Real acc(0);
    for (int k = 2; k <= n; k += 2) acc += u.coefficients[k] * g.coefficients[n - k];
    g.coefficients[n] = acc;
  }
  return g;
}

/// Spectral radius: 2*sqrt((d-1)*lambda)/(d-1+lambda) up to the critical
/// bias, and 1 above it. The formula branch evaluates to exactly 1.0 at
/// lambda = d-1, so the two branches join continuously.
inline double spectral_radius(const WalkParams& params) {
  if (params.regime() == Regime::Recurrent) return 1.0;
  const double dm1 = params.degree() - 1;
  return 2.0 * std::sqrt(dm1 * params.lambda()) / (dm1 + params.lambda());
}

/// Total return probability P(tau+ < infinity) = min(lambda, d-1)/(d-1).
inline double return_probability(const WalkParams& params) {
  if (params.regime() != Regime::Transient) return 1.0;
  return params.lambda() / (params.degree() - 1);
}

/// Derivative of the spectral-radius formula on the transient range:
/// sqrt((d-1)/lambda) * (d-1-lambda) / (d-1+lambda)^2. Cross-checked against
/// central finite differences of spectral_radius in the test suite.
inline double rho_derivative(const WalkParams& params) {
  if (params.regime() != Regime::Transient)
    throw Error(ErrorCode::NotTransient, "rho_derivative needs lambda < d-1");
  const double dm1 = params.degree() - 1;
  const double lambda = params.lambda();
  return std::sqrt(dm1 / lambda) * (dm1 - lambda) / ((dm1 + lambda) * (dm1 + lambda));
}

/// Scaling map Phi with G(z) = Phi(z * G(z)): the Green function solves this
/// fixed-point equation, which is the hook for the singularity analysis.
inline double green_implicit_map(const WalkParams& params, double t) {
  if (params.regime() != Regime::Transient)
    throw Error(ErrorCode::NotTransient, "the scaling map is defined for lambda < d-1");
  const double dm1 = params.degree() - 1;
  const double lambda = params.lambda();
  const double a = 2.0 * dm1 / (dm1 + lambda);
  const double b = (dm1 - lambda) / (dm1 + lambda);
  const double rho = spectral_radius(params);
  const double one_minus_b2 = 1.0 - b * b;
  return (-a * b + std::sqrt(a * a + rho * rho * one_minus_b2 * t * t)) / one_minus_b2;
}

/// Fixed-point residual Psi(u, v) = Phi(u*v) - v. At u = 1/rho and
/// v = G(1/rho) the residual and its first v-derivative vanish; the second
/// v-derivative and the u-derivative there are the Darboux constants.
inline double green_fixed_point_residual(const WalkParams& params, double u, double v) {
  return green_implicit_map(params, u * v) - v;
}

/// Constants of the singularity analysis at z = 1/rho, transient regime only.
/// p_const carries the leading constant used by p_asymptotic; its two
/// algebraic forms are checked against each other at construction.
struct DarbouxReport {
  double a;        // 2(d-1)/(d-1+lambda)
  double b;        // (d-1-lambda)/(d-1+lambda)
  double c1;       // second v-derivative of the fixed-point residual
  double c2;       // u-derivative of the fixed-point residual
  double rho;      // spectral radius
  double g_at_radius;  // G(1/rho) = 2(d-1)/(d-1-lambda)
  double p_const;  // leading constant for p^(2n) * rho^(-2n) * n^(3/2)
  double f_const;  // leading constant for the first-return law, 1/sqrt(pi)
};

inline DarbouxReport darboux_report(const WalkParams& params) {
  if (params.regime() != Regime::Transient)
    throw Error(ErrorCode::NotTransient, "darboux_report needs lambda < d-1");
  const double dm1 = params.degree() - 1;
  const double lambda = params.lambda();
  const double s = dm1 + lambda;
  const double gap = dm1 - lambda;

  DarbouxReport r;
  r.a = 2.0 * dm1 / s;
  r.b = gap / s;
  r.rho = spectral_radius(params);
  r.c1 = gap * gap * gap / (2.0 * dm1 * s * s);
  r.c2 = 2.0 * r.rho * dm1 / gap;
  r.g_at_radius = 2.0 * dm1 / gap;
  const double form_sqrt = std::sqrt(r.c1 / (2.0 * kPi * r.rho * r.c2)) * std::pow(2.0, -1.5);
  const double form_explicit = gap * gap / (16.0 * std::sqrt(kPi * lambda) * std::pow(dm1, 1.5));
  if (rel_diff(form_sqrt, form_explicit) > 1e-13)
    throw Error(ErrorCode::CrossCheckFailed, "darboux constant forms disagree");
  r.p_const = form_explicit;
  r.f_const = 1.0 / std::sqrt(kPi);
  return r;
}

/// Log of the asymptotic law for p^(2n)(o,o): the transient branch is
/// log(p_const) + 2n log(rho) - 1.5 log(n); the critical branch is the
/// central-binomial law -log(sqrt(pi n)).
inline double p_asymptotic_log(const WalkParams& params, long n) {
  if (n < 1) throw Error(ErrorCode::DomainError, "n must be positive");
  switch (params.regime()) {
    case Regime::Recurrent:
      throw Error(ErrorCode::NotCoveredRegime, "no p-asymptotic above the critical bias");
    case Regime::Critical:
      return -0.5 * std::log(kPi * static_cast<double>(n));
    case Regime::Transient: {
      const DarbouxReport r = darboux_report(params);
      return std::log(r.p_const) + 2.0 * static_cast<double>(n) * std::log(r.rho) -
             1.5 * std::log(static_cast<double>(n));
    }
  }
  throw Error(ErrorCode::DomainError, "unreachable");
}

inline double p_asymptotic(const WalkParams& params, long n) {
  return std::exp(p_asymptotic_log(params, n));
}

/// Log of the asymptotic law for the first-return probability at step 2n:
/// -0.5 log(pi) + 2n log(base) - 1.5 log(n) with base =
/// 2*sqrt((d-1)*lambda)/(d-1+lambda). Defined for every lambda > 0; above the
/// critical bias the base is below 1 even though the spectral radius is 1.
inline double f_asymptotic_log(const WalkParams& params, long n) {
  if (n < 1) throw Error(ErrorCode::DomainError, "n must be positive");
  const double dm1 = params.degree() - 1;
  const double base = 2.0 * std::sqrt(dm1 * params.lambda()) / (dm1 + params.lambda());
  return -0.5 * std::log(kPi) + 2.0 * static_cast<double>(n) * std::log(base) -
         1.5 * std::log(static_cast<double>(n));
}

inline double f_asymptotic(const WalkParams& params, long n) {
  return std::exp(f_asymptotic_log(params, n));
}

}  // namespace treewalk
