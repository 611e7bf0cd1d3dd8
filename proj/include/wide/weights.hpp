#pragma once

#include <vector>

#include "wide/grid.hpp"
#include "wide/problem.hpp"

namespace wide {

// Geometric node weights e_i = kappa^i with kappa = eps/(eps+tau), plus the
// energy factor c_eps in {1, kappa}. The classical exponential weight
// carries a global eps^2 prefactor; it rescales the objective without
// moving minimizers and is dropped here, recorded in reports as
// weight_prefactor_dropped.
struct WeightScheme {
  double epsilon = 0.0;          // > 0
  double kappa = 0.0;            // eps / (eps + tau)
  double eps_hat = 0.0;          // eps + tau
  double c_eps = 1.0;            // energy factor, in {1, kappa}
  std::vector<double> e;         // e[i] = kappa^i, i = 0..N

  double dropped_prefactor() const { return epsilon * epsilon; }
};

// Default energy factor: kappa (first-order evolution problems use the
// graded quadrature that reproduces the classical banded system exactly).
WeightScheme make_weights(double epsilon, const TimeGrid& grid);

// Energy factor chosen from the problem: kappa when rho = 0, 1 when
// rho > 0 (second-order problems use plain energy weighting; inertia and
// dissipation prefactors are graded instead — see functional.hpp).
WeightScheme weights_for(const WideProblem& problem, double epsilon);

// Explicit override of the energy factor (must be 1 or kappa).
WeightScheme make_weights_with_factor(double epsilon, const TimeGrid& grid,
                                      double c_eps);

}  // namespace wide
