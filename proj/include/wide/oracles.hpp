#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wide/grid.hpp"
#include "wide/problem.hpp"

namespace wide {

enum class ReferenceKind { Analytic, ImplicitEuler, Incremental, Leapfrog };

// Causal reference solution: either a discrete trajectory on its own grid
// or a closed-form evaluator t -> R^d (or both; evaluator preferred when
// present).
struct ReferenceSolution {
  ReferenceKind provenance = ReferenceKind::Analytic;
  Trajectory trajectory;               // empty values when analytic-only
  std::function<void(double, std::span<double>)> evaluate;  // may be null
  std::string name;

  bool analytic() const { return static_cast<bool>(evaluate); }
  // Value on an arbitrary time point: evaluator when analytic, linear
  // interpolation on the stored grid otherwise.
  std::vector<double> at(double t) const;
};

// Backward Euler: nu(u_i - u_{i-1})/tau + grad E(u_i) = f_i per step
// (per-step Newton for nonlinear E). Requires rho = 0, Quadratic(nu).
ReferenceSolution implicit_euler(const WideProblem& problem);

// Causal incremental minimization on a grid of step tau over [0, T]:
//   u_n = argmin_u rho|u - 2u_{n-1} + u_{n-2}|^2/(2 tau^2)
//                  + tau D((u - u_{n-1})/tau) + E(u) - f_n.u
// For smooth D each step solves the multistep stationarity
// rho*delta2 u_n + D'(delta u_n) + grad E(u_n) = f_n; for OneHomogeneous
// scalar steps the threshold problem is solved in closed form.
ReferenceSolution incremental_minimization(const WideProblem& problem,
                                           double tau);

// Explicit central-difference integrator for rho > 0 with no or Quadratic
// damping; second-order start. For mesh-derived problems enforces
// tau <= 0.5*h (StabilityViolation otherwise).
ReferenceSolution leapfrog_wave(const WideProblem& problem);

// Per-node static minimization of E(u) - f_i.u for convex coercive E.
ReferenceSolution solve_quasistatic(const EnergyModel& energy,
                                    const TimeGrid& grid);

// Closed-form catalogue:
//   exp_decay(lambda):  u0 e^{-lambda t} (gradient flow of lambda|u|^2/2,
//                       nu = 1)
//   harmonic(rho, lambda): u0 cos(w t) + (u1/w) sin(w t), w = sqrt(lambda/rho)
//   heat_mode(k):       e^{-mu_k t} sin(k pi x_j), mu_k the discrete
//                       eigenvalue of the mesh stiffness
//   wave_mode(k):       cos(sqrt(mu_k) t) sin(k pi x_j)
//   selection_t2:       u(t) = t^2
//   play(alpha):        (t - alpha)+  (ramp-input play operator)
//   wide_linear_bvp(lambda, nu, eps, T): exact minimizer of the rho=0
//       linear weighted problem: -eps*nu u'' + nu u' + lambda u = 0,
//       u(0) = u0, u'(T) = 0, evaluated in overflow-safe form from the
//       characteristic roots r± = (1 ± sqrt(1 + 4 eps lambda/nu))/(2 eps).
struct AnalyticSpec {
  std::string name;
  double lambda = 1.0;
  double nu = 1.0;
  double rho = 1.0;
  double alpha = 1.0;
  double epsilon = 0.0;
  double horizon = 1.0;
  std::vector<double> u0{1.0};
  std::vector<double> u1;
  int mode_k = 1;
  int mesh_points = 0;   // heat/wave modes: interior point count M
  double mesh_length = 1.0;
};
ReferenceSolution analytic_catalogue(const AnalyticSpec& spec);

// Derivative of the wide_linear_bvp solution (used by its own invariants).
double wide_linear_bvp_derivative(const AnalyticSpec& spec, double t);

}  // namespace wide
