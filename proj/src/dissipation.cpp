#include "wide/dissipation.hpp"

#include <cmath>

#include "wide/errors.hpp"

namespace wide {

namespace {

// Componentwise prox of s*(c/p)|w|^p: solves w + s*c*|w|^{p-2} w = v by
// monotone Newton/bisection on [0, |v|] (w shares the sign of v).
double power_prox_scalar(double v, double s, double p, double c) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  const double sign = v > 0.0 ? 1.0 : -1.0;
  double lo = 0.0, hi = a;
  double w = a / (1.0 + s * c);  // exact for p = 2, good start otherwise
  for (int it = 0; it < 200; ++it) {
    const double f = w + s * c * std::pow(w, p - 1.0) - a;
    if (std::abs(f) <= 1e-15 * (1.0 + a)) break;
    if (f > 0.0) {
      hi = w;
    } else {
      lo = w;
    }
    const double df = 1.0 + s * c * (p - 1.0) * std::pow(w, p - 2.0);
    double next = w - f / df;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    w = next;
  }
  return sign * w;
}

}  // namespace

double DissipationModel::value(std::span<const double> v) const {
  double s = 0.0;
  switch (kind) {
    case DissipationKind::Quadratic:
      for (double x : v) s += x * x;
      return 0.5 * nu * s;
    case DissipationKind::PowerLaw:
      for (double x : v) s += std::pow(std::abs(x), p);
      return coeff / p * s;
    case DissipationKind::OneHomogeneous:
      for (double x : v) s += std::abs(x);
      return alpha * s;
  }
  return s;
}

void DissipationModel::deriv(std::span<const double> v,
                             std::span<double> out) const {
  switch (kind) {
    case DissipationKind::Quadratic:
      for (size_t j = 0; j < v.size(); ++j) out[j] = nu * v[j];
      return;
    case DissipationKind::PowerLaw:
      for (size_t j = 0; j < v.size(); ++j) {
        const double a = std::abs(v[j]);
        out[j] = a == 0.0 ? 0.0 : coeff * std::pow(a, p - 2.0) * v[j];
      }
      return;
    case DissipationKind::OneHomogeneous:
      throw NonSmoothDissipation(
          "derivative of a 1-homogeneous dissipation is set-valued");
  }
}

double DissipationModel::curvature(double w) const {
  switch (kind) {
    case DissipationKind::Quadratic:
      return nu;
    case DissipationKind::PowerLaw: {
      double a = std::abs(w);
      if (p < 2.0 && a < jacobian_floor) a = jacobian_floor;
      if (a == 0.0) return 0.0;
      return coeff * (p - 1.0) * std::pow(a, p - 2.0);
    }
    case DissipationKind::OneHomogeneous:
      throw NonSmoothDissipation(
          "curvature of a 1-homogeneous dissipation is undefined");
  }
  return 0.0;
}

void DissipationModel::prox(std::span<const double> v, double s,
                            std::span<double> out) const {
  switch (kind) {
    case DissipationKind::Quadratic:
      for (size_t j = 0; j < v.size(); ++j) out[j] = v[j] / (1.0 + s * nu);
      return;
    case DissipationKind::PowerLaw:
      for (size_t j = 0; j < v.size(); ++j) {
        out[j] = power_prox_scalar(v[j], s, p, coeff);
      }
      return;
    case DissipationKind::OneHomogeneous: {
      const double t = s * alpha;  // soft threshold
      for (size_t j = 0; j < v.size(); ++j) {
        if (v[j] > t) {
          out[j] = v[j] - t;
        } else if (v[j] < -t) {
          out[j] = v[j] + t;
        } else {
          out[j] = 0.0;
        }
      }
      return;
    }
  }
}

DissipationModel quadratic_dissipation(double nu) {
  if (!(nu >= 0.0)) throw UnknownDissipation("quadratic weight must be >= 0");
  DissipationModel d;
  d.kind = DissipationKind::Quadratic;
  d.nu = nu;
  return d;
}

DissipationModel power_dissipation(double p, double coeff) {
  if (!(p > 1.0)) throw InvalidGrowth("power-law exponent must be > 1");
  if (!(coeff > 0.0)) throw UnknownDissipation("power-law coefficient must be > 0");
  DissipationModel d;
  d.kind = DissipationKind::PowerLaw;
  d.p = p;
  d.coeff = coeff;
  return d;
}

DissipationModel one_homogeneous_dissipation(double alpha) {
  if (!(alpha > 0.0)) throw UnknownDissipation("threshold must be > 0");
  DissipationModel d;
  d.kind = DissipationKind::OneHomogeneous;
  d.alpha = alpha;
  return d;
}

}  // namespace wide
