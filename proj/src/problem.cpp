#include "wide/problem.hpp"

#include <cmath>

#include "wide/errors.hpp"

namespace wide {

void WideProblem::validate() const {
  if (!(grid.horizon > 0.0)) throw NonPositiveHorizon("horizon must be > 0");
  if (grid.steps < 2) throw TooFewSteps("need at least 2 steps");
  if (!(rho >= 0.0)) throw InvalidParams("inertia must be >= 0");
  if (energy.dim < 1) throw ShapeMismatch("energy dimension must be >= 1");
  if (u0.size() != static_cast<size_t>(energy.dim)) {
    throw ShapeMismatch("initial state dimension mismatch");
  }
  if (rho > 0.0) {
    if (!u1.has_value()) {
      throw MissingInitialRate("rho > 0 requires an initial rate");
    }
    if (u1->size() != static_cast<size_t>(energy.dim)) {
      throw ShapeMismatch("initial rate dimension mismatch");
    }
  } else if (u1.has_value()) {
    throw ShapeMismatch("initial rate given but rho = 0");
  }
  if (rho == 0.0 && dissipation.trivial() && !quasistatic) {
    throw UnsupportedCombination(
        "no inertia and no dissipation: request the static per-node path "
        "explicitly");
  }
  if (energy.has_forcing() &&
      energy.forcing.size() !=
          static_cast<size_t>(grid.steps + 1) * energy.dim) {
    throw ShapeMismatch("forcing must provide one vector per grid node");
  }
  for (double x : u0) {
    if (!std::isfinite(x)) throw ShapeMismatch("initial state must be finite");
  }
}

Trajectory WideProblem::constrained_trajectory() const {
  Trajectory u = Trajectory::zeros(grid, energy.dim);
  const int d = energy.dim;
  for (long i = 0; i <= grid.steps; ++i) {
    for (int c = 0; c < d; ++c) u.node(i)[c] = u0[c];
  }
  if (rho > 0.0) {
    for (int c = 0; c < d; ++c) {
      u.node(1)[c] = u0[c] + grid.tau * (*u1)[c];
    }
    // Later nodes continue from the constrained second node.
    for (long i = 2; i <= grid.steps; ++i) {
      for (int c = 0; c < d; ++c) u.node(i)[c] = u.node(1)[c];
    }
  }
  return u;
}

}  // namespace wide
