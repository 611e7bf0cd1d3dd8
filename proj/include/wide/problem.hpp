#pragma once

#include <optional>
#include <vector>

#include "wide/dissipation.hpp"
#include "wide/energy.hpp"
#include "wide/grid.hpp"

namespace wide {

// Full evolution-problem specification: rho*u_tt + D'(u_t) + grad E(u) = f
// on [0, T] with u(0) = u0 and (when rho > 0) u_t(0) = u1.
struct WideProblem {
  TimeGrid grid;
  EnergyModel energy;
  DissipationModel dissipation;
  double rho = 0.0;
  std::vector<double> u0;
  std::optional<std::vector<double>> u1;

  // Set by the PDE factory when the problem is a spatial discretization
  // (spacing of the 1D mesh); 0 means "not mesh-derived". Used by the
  // leapfrog stability guard.
  double spatial_h = 0.0;

  // Degenerate rho = 0 with trivial dissipation is rejected unless the
  // problem was explicitly built for per-node static minimization.
  bool quasistatic = false;

  int dim() const { return energy.dim; }
  // First free node index of the space-time minimization: nodes 0 (and 1
  // when rho > 0) are constrained by the initial data.
  long first_free() const { return rho > 0.0 ? 2 : 1; }
  long free_nodes() const { return grid.steps - first_free() + 1; }

  // Throws the matching argument error when any invariant fails.
  void validate() const;

  // Builds the constrained trajectory prefix: u_0 = u0 and, for rho > 0,
  // u_1 = u0 + tau*u1; remaining nodes copied from fill (constant u0 when
  // fill is empty).
  Trajectory constrained_trajectory() const;
};

}  // namespace wide
