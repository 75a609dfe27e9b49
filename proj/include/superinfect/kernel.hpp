#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "superinfect/error.hpp"
#include "superinfect/rates.hpp"

namespace superinfect {

/// Offspring-type intensity mu(t'|t): expected number of type-t' offspring per
/// unit type from one type-t parent, closed form.
inline double kernel_mu(double t_prime, double t, const RateParams& p, double c) {
  if (c == 0.0 || p.beta2 == 0.0) return 0.0;
  const double b1 = p.beta1, b2 = p.beta2, r1 = p.rho1, r2 = p.rho2;
  const double a = b1 + r1 + r2;
  const double prefactor = c * b1 * b2 / (a * (b1 + b2 + r1 + r2));
  const double late = std::exp(-b1 * t - (b2 + 2.0 * r1 + r2) * t_prime);
  const double early = t_prime <= t ? std::exp(-b1 * t - (r1 - b1) * t_prime)
                                    : std::exp((b2 + r1 + r2) * t - (b2 + 2.0 * r1 + r2) * t_prime);
  return prefactor * (b2 * late + a * early);
}

/// Integrand over the primary transmission time s when s < t.
inline double kernel_integrand_before(double s, double t_prime, double t, const RateParams& p,
                                      double c) {
  const double lag = t_prime - t + s;  // secondary delay after the parent's acquisition
  return c * p.beta1 * std::exp(-p.beta1 * s) * p.beta2 * std::exp(-p.beta2 * lag) *
         std::exp(-p.rho1 * (t - s)) * std::exp(-(2.0 * p.rho1 + p.rho2) * lag);
}

/// Integrand over s when s >= t.
inline double kernel_integrand_after(double s, double t_prime, double t, const RateParams& p,
                                     double c) {
  return c * p.beta1 * std::exp(-p.beta1 * s) * p.beta2 * std::exp(-p.beta2 * t_prime) *
         std::exp(-(p.rho1 + p.rho2) * (s - t)) * std::exp(-(2.0 * p.rho1 + p.rho2) * t_prime);
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

struct KernelCases {
  QuadratureResult before;  ///< s in ((t - t')_+, t)
  QuadratureResult after;   ///< s in [t, inf)
};

namespace detail {

/// Adaptive Gauss-Kronrod on [lo, hi); the error is |GK61 - GK31|.
template <typename F>
QuadratureResult integrate_with_error(F f, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  const double fine = gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
  const double coarse = gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-14);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace detail

inline KernelCases kernel_mu_cases(double t_prime, double t, const RateParams& p, double c) {
  KernelCases k;
  if (c == 0.0 || p.beta2 == 0.0) return k;
  const double lo = std::max(0.0, t - t_prime);
  if (t > lo) {
    k.before = detail::integrate_with_error(
        [&](double s) { return kernel_integrand_before(s, t_prime, t, p, c); }, lo, t);
  }
  k.after = detail::integrate_with_error(
      [&](double u) { return kernel_integrand_after(t + u, t_prime, t, p, c); }, 0.0,
      std::numeric_limits<double>::infinity());
  return k;
}

/// mu(t'|t) by direct quadrature of the two transmission-order cases.
/// Throws if the estimated absolute error exceeds 1e-9.
inline QuadratureResult kernel_mu_quadrature(double t_prime, double t, const RateParams& p,
                                             double c) {
  require(t >= 0.0 && t_prime >= 0.0, "kernel arguments must be nonnegative");
  const KernelCases k = kernel_mu_cases(t_prime, t, p, c);
  QuadratureResult r{k.before.value + k.after.value, k.before.error + k.after.error};
  if (!(r.error <= 1e-9))
    throw NumericalError("kernel quadrature error estimate " + std::to_string(r.error) +
                         " exceeds 1e-9");
  return r;
}

/// Integral of mu(t'|t) over t' in [lo, hi).
inline double kernel_bin_integral(double lo, double hi, double t, const RateParams& p, double c) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double tp) { return kernel_mu(tp, t, p, c); };
  double total = 0.0;
  // Split at the kink t' = t.
  if (lo < t && t < hi) {
    total += gauss_kronrod<double, 61>::integrate(f, lo, t, 15, 1e-14);
    total += gauss_kronrod<double, 61>::integrate(f, t, hi, 15, 1e-14);
  } else {
    total += gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
  }
  return total;
}

/// Expected offspring count of a type-t parent: integral of mu(.|t) over [0, inf).
inline double kernel_total_intensity(double t, const RateParams& p, double c) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double tp) { return kernel_mu(tp, t, p, c); };
  double total = t > 0.0 ? gauss_kronrod<double, 61>::integrate(f, 0.0, t, 15, 1e-14) : 0.0;
  total += gauss_kronrod<double, 61>::integrate(f, t, std::numeric_limits<double>::infinity(), 15,
                                                 1e-14);
  return total;
}

}  // namespace superinfect
