#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wide {

// Energy landscape E : R^d -> R with gradient, optional Hessian, optional
// exact quadratic form, a convexity lower bound, and optional per-node
// forcing. Instances are immutable after construction and safe to share
// across threads.
struct EnergyModel {
  int dim = 1;
  std::string name;

  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  // Row-major dim*dim second derivative; empty std::function when absent
  // (solvers then fall back to finite-difference Hessian actions).
  std::function<void(std::span<const double>, std::span<double>)> hessian;

  // Row-major symmetric matrix L with E(u) = 0.5 * u^T L u, when exact.
  std::vector<double> quadratic_matrix;

  // Lower bound on the eigenvalues of the second derivative; may be
  // negative, or -infinity for energies with unbounded negative curvature.
  double lambda_convexity = 0.0;

  // Per-node forcing f_i, flattened to (steps+1)*dim entries; empty = none.
  // The forced objective uses E(u_i) - f_i . u_i.
  std::vector<double> forcing;

  bool has_hessian() const { return static_cast<bool>(hessian); }
  bool is_quadratic() const { return !quadratic_matrix.empty(); }
  bool has_forcing() const { return !forcing.empty(); }
  const double* forcing_at(long i) const {
    return has_forcing() ? forcing.data() + static_cast<size_t>(i) * dim
                         : nullptr;
  }
};

// Catalogue factories. Scalar-parameter quadratic builds E(u) = lambda|u|²/2.
EnergyModel quadratic_energy(double lambda, int dim = 1);
EnergyModel quadratic_energy_matrix(std::vector<double> matrix, int dim);
// E(u) = -(4/3)(u+)^{3/2}; gradient -2(u+)^{1/2}. Scalar; curvature is
// unbounded below near 0 (lambda_convexity = -inf).
EnergyModel sqrt_selection_energy();
// E(u) = |u|^q / q componentwise sum; gradient |u|^{q-2}u.
EnergyModel power_energy(double q, int dim = 1);
// E(u) = (u^2-1)^2/4 componentwise sum; curvature >= -1.
EnergyModel double_well_energy(int dim = 1);

// Name-based dispatcher used by the CLI: quadratic, sqrt_selection, power,
// double_well. PDE-discretized energies are built by the pde module and can
// be passed anywhere an EnergyModel is accepted.
EnergyModel builtin_energy(const std::string& name,
                           const std::map<std::string, double>& params);

// Returns a copy with per-node forcing attached (length (steps+1)*dim).
EnergyModel with_forcing(EnergyModel base, std::vector<double> forcing);

}  // namespace wide
