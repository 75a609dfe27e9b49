#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "superinfect/error.hpp"

namespace superinfect {

/// 0F1(a; z) = sum_k z^k / (k! (a)_k), summed in long double with Neumaier
/// compensation. Throws NumericalError when the alternating series loses more
/// than 1e-8 relative accuracy to cancellation.
inline double hyp0f1(double a, double z) {
  require(a > 0.0, "hyp0f1 requires a > 0");
  require(std::abs(z) <= 1e5, "hyp0f1 argument beyond overflow guard");
  using ld = long double;
  ld sum = 1.0L, comp = 0.0L, term = 1.0L, abs_sum = 1.0L;
  for (int k = 0; k < 100000; ++k) {
    term *= static_cast<ld>(z) / ((k + 1.0L) * (static_cast<ld>(a) + k));
    const ld next = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
    sum = next;
    abs_sum += std::abs(term);
    if (k + 1 > std::sqrt(std::abs(z)) &&
        std::abs(term) <= std::numeric_limits<ld>::epsilon() * std::abs(sum + comp))
      break;
  }
  const ld value = sum + comp;
  const ld rel_err = 8.0L * std::numeric_limits<ld>::epsilon() * abs_sum / std::abs(value);
  if (!(rel_err <= 1e-8L))
    throw NumericalError("hyp0f1(" + std::to_string(a) + ", " + std::to_string(z) +
                         "): cancellation exceeds 1e-8 relative");
  return static_cast<double>(value);
}

namespace detail {

/// 1 / (b_1 - w / (b_2 - w / (b_3 - ...))) with b_k = 2(nu + k - 1),
/// evaluated front to back by the modified Lentz method.
inline double bessel_cf_tail(double nu, double w) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double f = tiny, c = f, d = 0.0;
  for (long k = 1; k <= 2'000'000; ++k) {
    const double a = k == 1 ? 1.0 : -w;
    const double b = 2.0 * (nu + static_cast<double>(k) - 1.0);
    d = b + a * d;
    if (d == 0.0) d = tiny;
    c = b + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < eps) return f;
  }
  throw NumericalError("Bessel continued fraction did not converge (nu=" + std::to_string(nu) +
                       ", x^2=" + std::to_string(w) + ")");
}

}  // namespace detail

/// J_nu(x) / J_{nu-1}(x) for nu > 0 by the continued fraction
/// x / (2nu - x^2 / (2(nu+1) - x^2 / ...)).
inline double bessel_j_ratio(double nu, double x) {
  require(nu > 0.0, "bessel_j_ratio requires nu > 0");
  return x * detail::bessel_cf_tail(nu, x * x);
}

/// True iff z < j_a^2 / 4, i.e. 2 sqrt(z) lies below the first zero of J_a.
///
/// Runs the contiguous-relation recurrence
///   F(b-1)/F(b) = 1 - z F(b+1) / (b (b-1) F(b)),   F(b) = 0F1(b; -z),
/// downward from an order well above x = 2 sqrt(z). All ratios stay positive
/// exactly when J_nu(x) > 0 for nu = a, a+1, ..., which by interlacing of
/// Bessel zeros happens iff x < j_a.
inline bool below_first_bessel_zero(double a, double z) {
  if (z <= 0.0) return true;
  const double x = 2.0 * std::sqrt(z);
  const long steps = 2 * static_cast<long>(std::ceil(x)) + 50;
  const double top = a + 2.0 + static_cast<double>(steps);
  double ratio = 1.0 + z / (top * (top + 1.0));  // F(top+1)/F(top)
  for (long k = steps; k >= 0; --k) {
    const double b = a + 2.0 + static_cast<double>(k);
    const double inv = 1.0 - z * ratio / (b * (b - 1.0));  // F(b-1)/F(b)
    if (!(inv > 0.0)) return false;
    ratio = 1.0 / inv;
  }
  return true;
}

/// Phi_a(z) = 0F1(a+2; -z) / 0F1(a+1; -z) = (2(a+1)/x) J_{a+1}(x) / J_a(x),
/// x = 2 sqrt(z), without checking the domain.
inline double phi_ratio_unchecked(double a, double z) {
  return 2.0 * (a + 1.0) * detail::bessel_cf_tail(a + 1.0, 4.0 * z);
}

/// Phi_a(z) for 0 <= z < j_a^2/4. Phi_a(0) = 1 and Phi_a increases to a pole at j_a^2/4.
inline double phi_ratio(double a, double z) {
  require(a > 0.0, "phi_ratio requires a > 0");
  require(z >= 0.0, "phi_ratio requires z >= 0");
  require(below_first_bessel_zero(a, z), "phi_ratio argument at or beyond j_a^2/4");
  if (z == 0.0) return 1.0;
  return phi_ratio_unchecked(a, z);
}

/// Smallest positive zero of J_a, bisected inside a(a+2) < j_a^2 < 4(a+1)(a+2).
inline double bessel_first_zero(double a) {
  require(a >= 0.0, "bessel_first_zero requires a >= 0");
  double lo = std::sqrt(a * (a + 2.0));
  double hi = 2.0 * std::sqrt((a + 1.0) * (a + 2.0));
  auto below = [a](double x) { return below_first_bessel_zero(a, 0.25 * x * x); };
  if (!below(lo) || below(hi))
    throw NumericalError("first Bessel zero not bracketed for order " + std::to_string(a));
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace superinfect
