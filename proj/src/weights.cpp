#include "wide/weights.hpp"

#include <cmath>

#include "wide/errors.hpp"
#include "wide/problem.hpp"

namespace wide {

static WeightScheme build_scheme(double epsilon, const TimeGrid& grid,
                                 double c_eps) {
  if (!(epsilon > 0.0)) throw NonPositiveEpsilon("epsilon must be > 0");
  WeightScheme w;
  w.epsilon = epsilon;
  w.eps_hat = epsilon + grid.tau;
  w.kappa = epsilon / w.eps_hat;
  w.c_eps = c_eps;
  w.e.resize(static_cast<size_t>(grid.steps) + 1);
  w.e[0] = 1.0;
  for (size_t i = 1; i < w.e.size(); ++i) w.e[i] = w.e[i - 1] * w.kappa;
  return w;
}

WeightScheme make_weights(double epsilon, const TimeGrid& grid) {
  WeightScheme w = build_scheme(epsilon, grid, 0.0);
  w.c_eps = w.kappa;
  return w;
}

WeightScheme make_weights_with_factor(double epsilon, const TimeGrid& grid,
                                      double c_eps) {
  WeightScheme w = build_scheme(epsilon, grid, c_eps);
  const bool ok = c_eps == 1.0 || std::abs(c_eps - w.kappa) <= 1e-14;
  if (!ok) {
    throw InvalidParams("energy weight factor must be 1 or epsilon/(epsilon+tau)");
  }
  return w;
}

WeightScheme weights_for(const WideProblem& problem, double epsilon) {
  WeightScheme w = build_scheme(epsilon, problem.grid, 0.0);
  w.c_eps = problem.rho > 0.0 ? 1.0 : w.kappa;
  return w;
}

}  // namespace wide
