#include "wide/grid.hpp"

#include "wide/errors.hpp"

namespace wide {

TimeGrid TimeGrid::make(double horizon, long steps) {
  if (!(horizon > 0.0)) {
    throw NonPositiveHorizon("time grid requires horizon > 0");
  }
  if (steps < 2) {
    throw TooFewSteps("time grid requires at least 2 steps");
  }
  TimeGrid g;
  g.horizon = horizon;
  g.steps = steps;
  g.tau = horizon / static_cast<double>(steps);
  return g;
}

Trajectory Trajectory::zeros(const TimeGrid& grid, int dim) {
  if (dim < 1) {
    throw ShapeMismatch("trajectory dimension must be >= 1");
  }
  Trajectory u;
  u.grid = grid;
  u.dim = dim;
  u.values.assign(static_cast<size_t>(grid.steps + 1) * dim, 0.0);
  return u;
}

}  // namespace wide
