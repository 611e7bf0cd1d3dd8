#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wide/functional.hpp"
#include "wide/problem.hpp"
#include "wide/weights.hpp"

namespace wide {

enum class SolverPath { BandedDirect, Newton, ProxSplit, BruteForce };

struct MinimizeReport {
  double objective = 0.0;
  long iterations = 0;
  // Gradient norm for smooth solves, fixed-point residual for ProxSplit.
  double residual = 0.0;
  SolverPath solver = SolverPath::BandedDirect;
  bool converged = false;
  // Global objective prefactor dropped from the weight scheme (recorded for
  // traceability; minimizer-invariant).
  double weight_prefactor_dropped = 0.0;
};

struct SolveResult {
  Trajectory trajectory;
  MinimizeReport report;
};

// Direct solve of the classical banded system (scalar path) or its block
// generalization (quadratic-matrix energies). Scalar solves stream through
// the Thomas algorithm, so very long grids need O(N) memory and no
// factorization storage. Requires rho=0, Quadratic dissipation, quadratic
// energy. The returned trajectory satisfies u_N = u_{N-1} exactly (the
// assembled final row).
SolveResult solve_quadratic(const WideProblem& problem, const WeightScheme& w);

// Damped Newton on the scaled stationarity residual R(u) = 0 (identical
// iterates to Newton on the raw gradient, but immune to weight underflow).
// Backtracking line search on the objective while the weight ladder is
// representable, on 0.5|R|^2 otherwise; Levenberg fallback
// (J^T J + mu I) s = -J^T R when the Newton direction fails.
// tol <= 0 selects the default 1e-8*(1 + |R(init)|_inf).
SolveResult solve_newton(const WideProblem& problem, const WeightScheme& w,
                         const Trajectory& init, double tol);

// Nonsmooth dissipation solver.
//  - OneHomogeneous: primal-dual active-set solve of the scaled stationarity
//    inclusion (ehat/tau)(zeta_j - kappa zeta_{j+1}) + grad E(u_j) - f_j = 0,
//    zeta_j in alpha*sign(delta u_j); exact for quadratic energies, outer
//    linearization otherwise. Reported residual is the prox fixed-point
//    defect max_j |zeta_j - clamp(zeta_j + delta u_j, +-alpha)| combined
//    with the scaled row residual; the subgradient inclusion is re-checked
//    a posteriori before convergence is reported.
//  - PowerLaw 1<p<2: scaled-residual damped Newton with curvature floored
//    near zero rates (residual stays exact).
// tol <= 0 selects the default 1e-7.
SolveResult solve_prox(const WideProblem& problem, const WeightScheme& w,
                       const Trajectory& init, double tol);

// Literal proximal-gradient descent steps on the weighted objective
// (monotone by backtracking). Used to certify ProxSplit solutions and the
// descent property on fixtures with representable weights; returns the
// improved trajectory and the recorded objective sequence.
struct ProxDescentResult {
  Trajectory trajectory;
  std::vector<double> objectives;
};
ProxDescentResult prox_descent_steps(const WideProblem& problem,
                                     const WeightScheme& w,
                                     const Trajectory& init, int steps);

// Dense derivative-free oracle (Nelder–Mead with >= 20 deterministic random
// multi-starts and restart polishing) for free dimension <= 12; ties below
// 1e-12 resolved by lexicographically smallest trajectory.
SolveResult brute_force(const WideProblem& problem, const WeightScheme& w,
                        double tol, std::uint64_t seed = 1);

// Routes to the matching solver: nonsmooth dissipation (OneHomogeneous or
// PowerLaw p<2) -> ProxSplit; exact quadratic problems (quadratic energy
// and dissipation, with viscosity or inertia) -> the direct banded solve;
// everything else smooth -> Newton from the constant extension. The
// square-root selection energy gets a warm-started continuation in a C^1
// smoothing of its kink (the constant extension is a critical point there
// and the unbounded curvature at the kink defeats plain damped Newton).
SolveResult solve_auto(const WideProblem& problem, const WeightScheme& w);

const char* solver_name(SolverPath path);

}  // namespace wide
