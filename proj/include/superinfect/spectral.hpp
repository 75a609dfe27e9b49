#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "superinfect/error.hpp"
#include "superinfect/kernel.hpp"
#include "superinfect/parallel.hpp"
#include "superinfect/rates.hpp"
#include "superinfect/special_functions.hpp"

namespace superinfect {

/// The critical-connectivity equation in reduced form
///
///   x * Phi_gamma(x * z_scale) = u,      x = c / lambda,
///
/// obtained from the eigen-equation of the offspring kernel. The left side is
/// increasing on (0, singular_point()) from 0 to +inf, so the root is unique there.
struct ThresholdEquation {
  double gamma = 0.0;
  double u = 0.0;        ///< upper envelope: root of x = u when Phi = 1
  double z_scale = 0.0;  ///< Phi argument per unit x

  static ThresholdEquation from_rates(const RateParams& p) {
    p.validate();
    require(p.beta2 > 0.0, "threshold equation needs beta2 > 0");
    const double b1 = p.beta1, b2 = p.beta2, r1 = p.rho1, r2 = p.rho2;
    return {(b1 + b2 + r1 + r2) / r1, (b1 + r1 + r2) * (b1 + b2 + 2.0 * r1 + r2) / (b1 * b2),
            b1 * b2 / (r1 * r1)};
  }

  /// With beta1/rho1 = beta2/rho2 = alpha and phi = beta1/beta2:
  /// gamma = (1+alpha)(1+1/phi), u = (1+phi+alpha phi)(1+alpha+2phi+alpha phi)/(alpha^2 phi),
  /// z_scale = alpha^2/phi.
  static ThresholdEquation from_alpha_phi(double alpha, double phi) {
    require(alpha > 0.0 && phi > 0.0, "alpha and phi must be positive");
    return {(1.0 + alpha) * (1.0 + 1.0 / phi),
            (1.0 + phi + alpha * phi) * (1.0 + alpha + 2.0 * phi + alpha * phi) /
                (alpha * alpha * phi),
            alpha * alpha / phi};
  }

  double lhs(double x) const { return x * phi_ratio_unchecked(gamma, x * z_scale); }

  /// x at which Phi_gamma hits its pole, j_gamma^2 / (4 z_scale).
  double singular_point() const {
    const double j = bessel_first_zero(gamma);
    return j * j / (4.0 * z_scale);
  }

  /// Lower envelope from Phi_a(z) < 1 + 4z/(j_a^2 - 4z) and j_a^2 > a(a+2).
  double lower_envelope() const {
    const double q = 4.0 * z_scale * u;
    return u * (1.0 - q / (gamma * (gamma + 2.0) + q));
  }
};

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

/// Closed-form bounds l < c* < u.
inline Envelope envelope_bounds(double alpha, double phi) {
  const auto eq = ThresholdEquation::from_alpha_phi(alpha, phi);
  return {eq.lower_envelope(), eq.u};
}

/// Smallest positive root of eq.lhs(x) = eq.u, by bisection to 1e-13 relative.
inline double solve_threshold(const ThresholdEquation& eq) {
  const double singular = eq.singular_point();
  auto f = [&](double x) { return eq.lhs(x) - eq.u; };
  double lo = 1e-12 * eq.u;
  double hi = std::min(eq.u, 0.999 * singular);
  if (!(f(hi) > 0.0)) hi = singular * (1.0 - 1e-12);
  if (!(f(lo) < 0.0) || !(f(hi) > 0.0))
    throw NumericalError("critical connectivity not bracketed (gamma=" + std::to_string(eq.gamma) +
                         ", u=" + std::to_string(eq.u) + ")");
  for (int it = 0; it < 300 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct SpectralSolution {
  double alpha = 0.0;
  double phi = 0.0;
  double gamma = 0.0;
  double c_star = 0.0;
  double lower_env = 0.0;
  double upper_env = 0.0;

  double lambda_of(double c) const { return c / c_star; }
};

/// Critical mean degree c* for beta1/rho1 = beta2/rho2 = alpha, phi = beta1/beta2.
inline SpectralSolution critical_connectivity(double alpha, double phi) {
  const auto eq = ThresholdEquation::from_alpha_phi(alpha, phi);
  SpectralSolution s{alpha, phi, eq.gamma, solve_threshold(eq), eq.lower_envelope(), eq.u};
  if (!(s.lower_env < s.c_star && s.c_star < s.upper_env))
    throw NumericalError("c* escaped its envelope at alpha=" + std::to_string(alpha) +
                         ", phi=" + std::to_string(phi));
  return s;
}

/// c* for arbitrary rates.
inline double critical_connectivity(const RateParams& p) {
  return solve_threshold(ThresholdEquation::from_rates(p));
}

/// Top eigenvalue of the offspring operator. It depends on c only through
/// c / c*, so lambda = c / c*; survival has positive probability iff lambda > 1.
inline double top_eigenvalue(double c, double alpha, double phi) {
  require(c > 0.0, "mean degree must be positive");
  return c / critical_connectivity(alpha, phi).c_star;
}

inline double top_eigenvalue_general(const RateParams& p, double c) {
  require(c > 0.0, "mean degree must be positive");
  return c / critical_connectivity(p);
}

/// Eigenfunction psi(t) = exp(-(beta2+rho1+rho2) t) * sum_k a_k exp(-k rho1 t)
/// truncated after K terms, with a_1 = 1.
struct EigenfunctionSeries {
  RateParams rates;
  double c = 0.0;
  double lambda = 0.0;          ///< c / c*
  double partial_lambda = 0.0;  ///< c * sum_{k<=K} a_k b_k
  std::vector<double> a;        ///< a[k-1] = a_k
  bool truncation_warning = false;

  std::size_t order() const { return a.size(); }

  double operator()(double t) const {
    const double y = std::exp(-rates.rho1 * t);
    double acc = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) acc = (acc + a[k]) * y;
    return std::exp(-(rates.beta2 + rates.rho1 + rates.rho2) * t) * acc;
  }
};

inline EigenfunctionSeries eigenfunction_series(const RateParams& p, double c, std::size_t K) {
  require(K >= 5, "eigenfunction truncation must be at least 5");
  require(c > 0.0, "mean degree must be positive");
  EigenfunctionSeries s;
  s.rates = p;
  s.c = c;
  s.lambda = top_eigenvalue_general(p, c);
  const double b1 = p.beta1, b2 = p.beta2, r1 = p.rho1, r2 = p.rho2;
  const double base = b1 + r1 + r2;
  s.a.resize(K);
  double a_k = 1.0, sum = 0.0, last = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k);
    const double e_k = b1 + b2 + (kk + 1.0) * r1 + r2;
    const double b_k = b1 * b2 * (base + kk * r1) / (kk * r1 * base * e_k);
    const double d_k = b1 * b2 / (kk * r1 * e_k);
    s.a[k - 1] = a_k;
    last = a_k * b_k;
    sum += last;
    a_k = -c * a_k * d_k / s.lambda;
  }
  s.partial_lambda = c * sum;
  s.truncation_warning = std::abs(last) > 1e-12 * std::abs(s.lambda);
  return s;
}

inline EigenfunctionSeries eigenfunction_series(double alpha, double phi, double c, std::size_t K) {
  return eigenfunction_series(RateParams::from_alpha_phi(alpha, phi), c, K);
}

/// M[psi](t') = integral over t of mu(t'|t) psi(t), by adaptive quadrature split at t = t'.
template <typename Psi>
double apply_operator(const Psi& psi, double t_prime, const RateParams& p, double c) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double t) { return kernel_mu(t_prime, t, p, c) * psi(t); };
  double total = t_prime > 0.0 ? gauss_kronrod<double, 61>::integrate(f, 0.0, t_prime, 15, 1e-14)
                               : 0.0;
  total += gauss_kronrod<double, 61>::integrate(f, t_prime, std::numeric_limits<double>::infinity(),
                                                 15, 1e-14);
  return total;
}

/// max |M[psi] - lambda psi| / max |psi| over `points` uniform points on [0, T].
inline double eigen_residual(const EigenfunctionSeries& s, double T, std::size_t points = 201) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(points - 1);
    const double psi = s(t);
    num = std::max(num, std::abs(apply_operator(s, t, s.rates, s.c) - s.lambda * psi));
    den = std::max(den, std::abs(psi));
  }
  return num / den;
}

/// Default truncation for the discretized operator: the eigenfunction decays
/// like exp(-(beta2 + 2 rho1 + rho2) t).
inline double default_truncation(const RateParams& p) {
  return 40.0 / (p.beta2 + 2.0 * p.rho1 + p.rho2);
}

namespace detail {

/// Dominant eigenvalue of the trapezoid (Nystrom) discretization on [0, T].
inline double power_iteration_radius(const RateParams& p, double c, double T, std::size_t n,
                                     unsigned threads) {
  const double h = T / static_cast<double>(n - 1);
  std::vector<double> grid(n), weight(n, h);
  for (std::size_t i = 0; i < n; ++i) grid[i] = h * static_cast<double>(i);
  weight.front() = weight.back() = 0.5 * h;
  std::vector<double> matrix(n * n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j)
      matrix[i * n + j] = kernel_mu(grid[i], grid[j], p, c) * weight[j];
  });

  std::vector<double> v(n, 1.0), w(n);
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    parallel_for(n, threads, [&](std::size_t i) {
      const double* row = &matrix[i * n];
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
      w[i] = acc;
    });
    const double norm = *std::max_element(w.begin(), w.end());
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (it > 0 && std::abs(norm - lambda) <= 1e-10 * norm) return norm;
    lambda = norm;
  }
  throw NumericalError("power iteration did not converge");
}

}  // namespace detail

struct DiscretizedRadius {
  double lambda = 0.0;          ///< on (T, n_grid)
  double lambda_doubled = 0.0;  ///< on (2T, 2 n_grid)
  double relative_change = 0.0;
};

/// Spectral radius of the kernel operator truncated to [0, T], by power
/// iteration on an n_grid-point trapezoid discretization. Throws if doubling
/// T and n_grid moves the result by 0.2% or more. T <= 0 selects default_truncation(p).
inline DiscretizedRadius discretized_spectral_radius(const RateParams& p, double c, double T = 0.0,
                                                     std::size_t n_grid = 600,
                                                     unsigned threads = 1) {
  require(n_grid >= 64, "n_grid must be at least 64");
  require(c >= 0.0, "mean degree must be nonnegative");
  p.validate();
  if (T <= 0.0) T = default_truncation(p);
  DiscretizedRadius r;
  if (c == 0.0 || p.beta2 == 0.0) return r;
  r.lambda = detail::power_iteration_radius(p, c, T, n_grid, threads);
  r.lambda_doubled = detail::power_iteration_radius(p, c, 2.0 * T, 2 * n_grid, threads);
  r.relative_change = std::abs(r.lambda_doubled - r.lambda) / r.lambda_doubled;
  if (!(r.relative_change < 2e-3))
    throw NumericalError("discretized spectral radius not converged under doubling: " +
                         std::to_string(r.relative_change));
  return r;
}

/// The interval of phi on which c > c*(alpha, phi), or nullopt when c is
/// below the minimum of the boundary curve.
inline std::optional<std::pair<double, double>> survival_window(double alpha, double c) {
  auto cstar = [&](double log_phi) {
    return critical_connectivity(alpha, std::exp(log_phi)).c_star;
  };
  // c*(phi) is unimodal in log phi (convex survival region).
  double a = std::log(1e-6), b = std::log(1e6);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = cstar(x1), f2 = cstar(x2);
  while (b - a > 1e-9) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - g * (b - a); f1 = cstar(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + g * (b - a); f2 = cstar(x2);
    }
  }
  const double log_min = 0.5 * (a + b);
  if (!(cstar(log_min) < c)) return std::nullopt;

  auto root = [&](double inside, double step) {
    double outside = inside + step;
    while (cstar(outside) < c) outside += step;
    for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-13; ++it) {
      const double mid = 0.5 * (inside + outside);
      (cstar(mid) < c ? inside : outside) = mid;
    }
    return std::exp(0.5 * (inside + outside));
  };
  return std::pair{root(log_min, -std::log(10.0)), root(log_min, std::log(10.0))};
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

/// log-spaced grid of `points` values on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  require(lo > 0.0 && hi >= lo && points >= 1, "invalid log grid");
  std::vector<double> g(points);
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  require(hi >= lo && points >= 1, "invalid linear grid");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

}  // namespace superinfect
