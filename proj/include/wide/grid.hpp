#pragma once

#include <vector>

namespace wide {

// Uniform time grid t_i = i * tau, i = 0..steps, with tau = horizon / steps.
struct TimeGrid {
  double horizon = 0.0;  // T > 0
  long steps = 0;        // N >= 2
  double tau = 0.0;      // T / N

  // Validates T > 0 and N >= 2, then derives tau.
  static TimeGrid make(double horizon, long steps);

  double node(long i) const { return tau * static_cast<double>(i); }
};

// Trajectory u_0..u_N of d-dimensional nodes stored as one flat row-major
// array of (steps+1)*dim doubles: node(i) starts at values[i*dim].
struct Trajectory {
  TimeGrid grid;
  int dim = 1;
  std::vector<double> values;

  static Trajectory zeros(const TimeGrid& grid, int dim);

  double* node(long i) { return values.data() + static_cast<size_t>(i) * dim; }
  const double* node(long i) const {
    return values.data() + static_cast<size_t>(i) * dim;
  }
  long nodes() const { return grid.steps + 1; }
};

}  // namespace wide
