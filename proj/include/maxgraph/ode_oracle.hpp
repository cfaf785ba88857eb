#pragma once

// Rotationally symmetric maximal graphs on the unit sphere. With theta the
// colatitude, maximality reduces to sin(theta) u' / sqrt(1 - u'^2) = c, i.e.
// u' = c / sqrt(sin^2 theta + c^2). The primitive has a closed form in
// incomplete elliptic integrals of the first kind:
//   G(theta) = c/sqrt(1+c^2) * (K(k) - F(pi/2 - theta, k)),  k = 1/sqrt(1+c^2),
// for theta <= pi/2, extended by G(pi - theta) = 2 G(pi/2) - G(theta).

#include <cmath>
#include <numbers>
#include <string>

#include "maxgraph/error.hpp"

namespace maxgraph {

class RotationalProfile {
 public:
  RotationalProfile(double c, double theta0) : c_(c), theta0_(theta0) {}

  double constant() const noexcept { return c_; }
  double inner_colatitude() const noexcept { return theta0_; }

  /// u(theta) - u(theta0).
  double operator()(double theta) const { return primitive(theta) - primitive(theta0_); }

  double slope(double theta) const {
    const double s = std::sin(theta);
    return c_ / std::sqrt(s * s + c_ * c_);
  }

  /// Rise between theta0 and pi - theta0.
  double rise() const { return (*this)(std::numbers::pi - theta0_); }

  /// int_0^theta c / sqrt(sin^2 + c^2).
  double primitive(double theta) const {
    if (c_ == 0.0) return 0.0;
    const double half = std::numbers::pi / 2;
    if (theta > half) return 2.0 * primitive(half) - primitive(std::numbers::pi - theta);
    const double q = std::sqrt(1.0 + c_ * c_);
    const double k = 1.0 / q;
    return c_ / q * (std::comp_ellint_1(k) - std::ellint_1(k, half - theta));
  }

 private:
  double c_;
  double theta0_;
};

/// The profile rising by tau from colatitude theta0 to pi - theta0
/// (bisection on c; theta0 = 0 is the pole-to-pole case).
inline RotationalProfile rotational_profile(double tau, double theta0 = 0.0) {
  const double span = std::numbers::pi - 2.0 * theta0;
  if (!(theta0 >= 0.0 && span > 0.0))
    throw Error(ErrorCode::invalid_parameter, "inner colatitude must lie in [0, pi/2)");
  if (!(std::abs(tau) < span))
    throw Error(ErrorCode::invalid_parameter,
                "rise " + std::to_string(tau) + " is not below the distance " + std::to_string(span));
  const double sign = tau < 0 ? -1.0 : 1.0;
  const double target = std::abs(tau);
  if (target == 0.0) return {0.0, theta0};
  double lo = 0.0, hi = 1.0;
  while (RotationalProfile(hi, theta0).rise() < target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (RotationalProfile(mid, theta0).rise() < target ? lo : hi) = mid;
  }
  return {sign * 0.5 * (lo + hi), theta0};
}

}  // namespace maxgraph
