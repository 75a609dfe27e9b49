#pragma once

#include <string>

#include "superinfect/error.hpp"

namespace superinfect {

/// Per-edge transmission and per-node recovery rates of the two infections.
struct RateParams {
  double beta1 = 1.0;  ///< primary transmission
  double rho1 = 1.0;   ///< primary recovery
  double beta2 = 1.0;  ///< secondary transmission (0 disables the secondary)
  double rho2 = 1.0;   ///< secondary recovery

  double alpha() const { return beta1 / rho1; }
  double phi() const { return beta1 / beta2; }

  void validate() const {
    require(beta1 > 0.0 && rho1 > 0.0 && rho2 > 0.0,
            "rates beta1, rho1, rho2 must be positive");
    require(beta2 >= 0.0, "beta2 must be nonnegative");
  }

  /// Symmetric-virulence rates with beta1/rho1 = beta2/rho2 = alpha and
  /// beta1/beta2 = phi, time measured in units of 1/rho1.
  static RateParams from_alpha_phi(double alpha, double phi, double rho1 = 1.0) {
    require(alpha > 0.0 && phi > 0.0 && rho1 > 0.0, "alpha, phi and rho1 must be positive");
    RateParams p;
    p.rho1 = rho1;
    p.beta1 = alpha * rho1;
    p.beta2 = p.beta1 / phi;
    p.rho2 = p.beta2 / alpha;
    return p;
  }

  RateParams scaled(double kappa) const {
    return RateParams{beta1 * kappa, rho1 * kappa, beta2 * kappa, rho2 * kappa};
  }
};

}  // namespace superinfect
