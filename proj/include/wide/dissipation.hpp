#pragma once

#include <span>

namespace wide {

enum class DissipationKind { Quadratic, PowerLaw, OneHomogeneous };

// Convex dissipation density D : R^d -> [0, inf), applied to discrete rates.
// All variants are separable across components:
//   Quadratic(nu):        D(v) = (nu/2) |v|^2
//   PowerLaw(p, coeff):   D(v) = (coeff/p) sum_j |v_j|^p,  p > 1
//   OneHomogeneous(alpha): D(v) = alpha * sum_j |v_j|  (1-homogeneous)
struct DissipationModel {
  DissipationKind kind = DissipationKind::Quadratic;
  double nu = 1.0;     // Quadratic weight, >= 0
  double p = 2.0;      // PowerLaw exponent, > 1
  double coeff = 1.0;  // PowerLaw coefficient, > 0
  double alpha = 1.0;  // OneHomogeneous threshold, > 0

  double value(std::span<const double> v) const;

  // Derivative D'(v) componentwise; requires smooth() (or PowerLaw p>1,
  // where D' exists but is not Lipschitz for p<2 — solvers guard that case).
  void deriv(std::span<const double> v, std::span<double> out) const;

  // Scalar second derivative D''(w) of the per-component density at w.
  // For PowerLaw p<2 the value is evaluated with |w| floored at
  // jacobian_floor to keep Newton Jacobians finite; the floor affects only
  // curvature, never values/derivatives.
  double curvature(double w) const;

  // prox(v, s) = argmin_w s*D(w) + 0.5|w - v|^2, componentwise.
  void prox(std::span<const double> v, double s, std::span<double> out) const;

  // Smooth for gradient-based paths: Quadratic, or PowerLaw with p >= 2.
  bool smooth() const {
    return kind == DissipationKind::Quadratic ||
           (kind == DissipationKind::PowerLaw && p >= 2.0);
  }
  bool trivial() const {
    return kind == DissipationKind::Quadratic && nu == 0.0;
  }

  static constexpr double jacobian_floor = 1e-12;
};

DissipationModel quadratic_dissipation(double nu);
DissipationModel power_dissipation(double p, double coeff);
DissipationModel one_homogeneous_dissipation(double alpha);

}  // namespace wide
