#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "wide/errors.hpp"
#include "wide/functional.hpp"
#include "wide/minimize.hpp"

using namespace wide;

namespace {

WideProblem scalar_flow(double lambda, double nu, double horizon, long steps,
                        double u0) {
  WideProblem p;
  p.grid = TimeGrid::make(horizon, steps);
  p.energy = quadratic_energy(lambda, 1);
  p.dissipation = quadratic_dissipation(nu);
  p.u0 = {u0};
  return p;
}

double sup_diff(const Trajectory& a, const Trajectory& b) {
  double sup = 0.0;
  for (long i = 0; i <= a.grid.steps; ++i)
    for (int c = 0; c < a.dim; ++c)
      sup = std::max(sup, std::abs(a.node(i)[c] - b.node(i)[c]));
  return sup;
}

}  // namespace

TEST_CASE("direct and Newton solves agree on the quadratic minimum value") {
  WideProblem p = scalar_flow(1.0, 1.0, 1.0, 100, 1.0);
  WeightScheme w = weights_for(p, 0.01);
  SolveResult d = solve_quadratic(p, w);
  SolveResult n = solve_newton(p, w, p.constrained_trajectory(), -1.0);
  CHECK(d.report.converged);
  CHECK(n.report.converged);
  CHECK(std::abs(d.report.objective - n.report.objective) <=
        1e-12 * (1.0 + std::abs(d.report.objective)));
  // Each solution satisfies its own closure: the direct solve ends with the
  // natural condition, the Newton solve with full stationarity.
  double umax = 0.0;
  for (long i = 0; i <= 100; ++i)
    umax = std::max(umax, std::abs(d.trajectory.node(i)[0]));
  CHECK(std::abs(d.trajectory.node(100)[0] - d.trajectory.node(99)[0]) <=
        1e-12 * umax);
  std::vector<double> r = scaled_residual(p, w, n.trajectory);
  double rmax = 0.0;
  for (double v : r) rmax = std::max(rmax, std::abs(v));
  CHECK(rmax <= 1e-7);
}

TEST_CASE("Newton needs at most two iterations on quadratic objectives") {
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 40);
  p.energy = quadratic_energy(2.0, 2);
  p.dissipation = quadratic_dissipation(1.5);
  p.rho = 0.5;
  p.u0 = {1.0, -0.5};
  p.u1 = std::vector<double>{0.0, 0.25};
  WeightScheme w = weights_for(p, 0.05);
  SolveResult r = solve_newton(p, w, p.constrained_trajectory(), -1.0);
  CHECK(r.report.converged);
  CHECK(r.report.iterations <= 2);
  CHECK(r.report.solver == SolverPath::Newton);
}

TEST_CASE("inertial oscillation is tracked at small epsilon") {
  // u'' + u = 0, u(0) = 1, u'(0) = 0 has solution cos(t).
  WideProblem p;
  p.grid = TimeGrid::make(2.0, 2000);
  p.energy = quadratic_energy(1.0, 1);
  p.dissipation = quadratic_dissipation(0.0);
  p.rho = 1.0;
  p.u0 = {1.0};
  p.u1 = std::vector<double>{0.0};
  WeightScheme w = weights_for(p, 1e-3);
  SolveResult r = solve_auto(p, w);
  CHECK(r.report.converged);
  double sup = 0.0;
  for (long i = 0; i <= 2000; ++i)
    sup = std::max(sup,
                   std::abs(r.trajectory.node(i)[0] - std::cos(p.grid.node(i))));
  CHECK(sup <= 0.01);
}

TEST_CASE("rate-independent play follows the ramp threshold") {
  // Forcing t against unit yield: nothing moves before t = 1, then the
  // state tracks (t - 1).
  WideProblem p;
  p.grid = TimeGrid::make(2.0, 2000);
  std::vector<double> f(2001);
  for (long i = 0; i <= 2000; ++i) f[i] = p.grid.node(i);
  p.energy = with_forcing(quadratic_energy(1.0, 1), f);
  p.dissipation = one_homogeneous_dissipation(1.0);
  p.u0 = {0.0};
  p.quasistatic = true;
  WeightScheme w = weights_for(p, 1e-3);
  SolveResult r = solve_auto(p, w);
  CHECK(r.report.converged);
  CHECK(r.report.solver == SolverPath::ProxSplit);
  double sup = 0.0;
  for (long i = 0; i <= 2000; ++i) {
    const double t = p.grid.node(i);
    sup = std::max(sup, std::abs(r.trajectory.node(i)[0] -
                                 std::max(t - 1.0, 0.0)));
  }
  CHECK(sup <= 2e-2);
}

TEST_CASE("slow power-law rates match the dense oracle") {
  WideProblem p;
  p.grid = TimeGrid::make(0.6, 6);
  p.energy = quadratic_energy(1.0, 1);
  p.dissipation = power_dissipation(1.5, 1.0);
  p.u0 = {1.0};
  WeightScheme w = weights_for(p, 0.1);
  SolveResult a = solve_auto(p, w);
  CHECK(a.report.solver == SolverPath::ProxSplit);
  CHECK(a.report.converged);
  SolveResult b = brute_force(p, w, 1e-9, 42);
  CHECK(std::abs(a.report.objective - b.report.objective) <=
        1e-10 * (1.0 + std::abs(b.report.objective)));
  CHECK(sup_diff(a.trajectory, b.trajectory) <= 1e-5);
}

TEST_CASE("proximal descent steps never increase the objective") {
  WideProblem p;
  p.grid = TimeGrid::make(0.8, 8);
  p.energy = double_well_energy(1);
  p.dissipation = quadratic_dissipation(1.0);
  p.u0 = {2.0};
  WeightScheme w = weights_for(p, 0.1);
  ProxDescentResult r =
      prox_descent_steps(p, w, p.constrained_trajectory(), 30);
  REQUIRE(r.objectives.size() == 31);
  for (size_t k = 1; k < r.objectives.size(); ++k)
    CHECK(r.objectives[k] <= r.objectives[k - 1] + 1e-14);
  CHECK(r.objectives.back() < r.objectives.front());
}

TEST_CASE("strictly convex problems give one minimizer from any start") {
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 12);
  p.energy = quadratic_energy(1.0, 2);
  p.dissipation = quadratic_dissipation(1.0);
  p.rho = 0.7;
  p.u0 = {1.0, 0.0};
  p.u1 = std::vector<double>{0.0, 1.0};
  WeightScheme w = weights_for(p, 0.1);
  Trajectory a = p.constrained_trajectory();
  Trajectory b = p.constrained_trajectory();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (long i = p.first_free(); i <= 12; ++i)
    for (int c = 0; c < 2; ++c) b.node(i)[c] += unif(rng);
  SolveResult ra = solve_newton(p, w, a, 1e-12);
  SolveResult rb = solve_newton(p, w, b, 1e-12);
  CHECK(sup_diff(ra.trajectory, rb.trajectory) <= 1e-7);
}

TEST_CASE("selection picks the moving branch, not the rest state") {
  // The flat zero trajectory is a critical point of the square-root
  // energy; the solver must still find the descending branch that leaves
  // the degenerate minimum.
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 1000);
  p.energy = sqrt_selection_energy();
  p.dissipation = quadratic_dissipation(1.0);
  p.u0 = {0.0};
  p.quasistatic = true;
  WeightScheme w = weights_for(p, 1e-2);
  SolveResult r = solve_auto(p, w);
  CHECK(r.report.converged);
  CHECK(r.trajectory.node(1000)[0] > 0.5);
  CHECK(r.trajectory.node(1000)[0] < 1.5);
  for (long i = 1; i <= 1000; ++i)
    CHECK(r.trajectory.node(i)[0] >= r.trajectory.node(i - 1)[0] - 1e-12);
}

TEST_CASE("dense oracle is deterministic for a fixed seed") {
  WideProblem p = scalar_flow(1.0, 1.0, 0.4, 4, 1.5);
  WeightScheme w = weights_for(p, 0.1);
  SolveResult a = brute_force(p, w, 1e-9, 7);
  SolveResult b = brute_force(p, w, 1e-9, 7);
  CHECK(a.report.objective == b.report.objective);
  CHECK(sup_diff(a.trajectory, b.trajectory) == 0.0);
  SolveResult c = brute_force(p, w, 1e-9, 8);
  CHECK(std::abs(a.report.objective - c.report.objective) <=
        1e-7 * (1.0 + std::abs(a.report.objective)));
}

TEST_CASE("dense oracle rejects high-dimensional searches") {
  WideProblem p = scalar_flow(1.0, 1.0, 1.3, 13, 1.0);
  WeightScheme w = weights_for(p, 0.1);
  CHECK_THROWS_AS(brute_force(p, w, 1e-6), DimensionTooLarge);
}

TEST_CASE("solvers reject rate models outside their contract") {
  WideProblem smooth = scalar_flow(1.0, 1.0, 0.5, 5, 1.0);
  WeightScheme w = weights_for(smooth, 0.1);

  WideProblem nonsmooth = smooth;
  nonsmooth.dissipation = one_homogeneous_dissipation(1.0);
  nonsmooth.quasistatic = true;
  CHECK_THROWS_AS(solve_newton(nonsmooth, weights_for(nonsmooth, 0.1),
                               nonsmooth.constrained_trajectory(), -1.0),
                  NonSmoothDissipation);

  WideProblem cubic_rate = smooth;
  cubic_rate.dissipation = power_dissipation(3.0, 1.0);
  CHECK_THROWS_AS(solve_quadratic(cubic_rate, weights_for(cubic_rate, 0.1)),
                  ShapeMismatch);
  CHECK_THROWS_AS(solve_prox(cubic_rate, weights_for(cubic_rate, 0.1),
                             cubic_rate.constrained_trajectory(), -1.0),
                  InvalidParams);

  CHECK_THROWS_AS(
      solve_prox(smooth, w, smooth.constrained_trajectory(), -1.0),
      InvalidParams);

  WideProblem nonquad = smooth;
  nonquad.energy = double_well_energy(1);
  CHECK_THROWS_AS(solve_quadratic(nonquad, weights_for(nonquad, 0.1)),
                  ShapeMismatch);
}

TEST_CASE("solver names are stable identifiers") {
  CHECK(std::string(solver_name(SolverPath::BandedDirect)) == "BandedDirect");
  CHECK(std::string(solver_name(SolverPath::Newton)) == "Newton");
  CHECK(std::string(solver_name(SolverPath::ProxSplit)) == "ProxSplit");
  CHECK(std::string(solver_name(SolverPath::BruteForce)) == "BruteForce");
}
