#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wide/problem.hpp"
#include "wide/weights.hpp"

namespace wide {

struct DiagnosticRow {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double epsilon = 0.0;
  double tau = 0.0;
};

struct DiagnosticReport {
  std::vector<DiagnosticRow> rows;
  bool all_pass() const;
};

// Per-node equation-units residual of the evolution stationarity system at
// nodes where the full difference stencil fits (j in [1, N-1] for rho=0,
// [2, N-2] for rho>0); rows are exact algebraic zeros at interior nodes of
// assembled/converged minimizers. Returns one norm per stencil-fitting node.
std::vector<double> el_residual(const Trajectory& u, const WideProblem& problem,
                                const WeightScheme& w);

// Natural final conditions. rho=0: single residual |u_N - u_{N-1}|
// (exactly 0 for the assembled banded path). rho>0: the pair
// r1 = |ehat^2 rho delta2 u_N|, r2 = |-ehat^2 rho delta3 u_N
// + ehat nu delta u_N| in equation units, both O(tau) at minimizers.
struct FinalConditions {
  std::vector<double> residuals;  // 1 entry (rho=0) or 2 (rho>0)
  double threshold = 0.0;
  bool pass = false;
};
FinalConditions final_conditions(const Trajectory& u,
                                 const WideProblem& problem,
                                 const WeightScheme& w);

// Energy-dissipation identity obtained by testing stationarity with the
// trajectory's own rate (rho=0, Quadratic(nu)):
//   global defect |(eps nu/2)|delta u_1|^2 + nu sum tau|delta u_i|^2
//                  + E(u_N) - E(u_0)|
//   local sup defect |nu|delta u_i|^2
//                  + Delta_i(-(eps nu/2)|delta u|^2 + E(u))/tau|.
struct InnerVariation {
  double global_defect = 0.0;
  double local_sup_defect = 0.0;
};
InnerVariation inner_variation_identity(const Trajectory& u,
                                        const WideProblem& problem,
                                        const WeightScheme& w);

// A-priori-estimate monitors evaluated per epsilon across a sweep family:
//   nested      rho sum tau|delta2 u|^2 + nu sum tau|delta u|^2 + sum tau E
//   maxreg      eps^2 nu^2 sum tau|delta2 u|^2 + (nu^2/2) sum tau|delta u|^2
//               + sum tau |grad E|^2
//   scaling     max_t [ rho|delta u(t)|^2 + nu sum_{s<=t} tau|delta u|^2 ]
//   windowed    max_t (1/eps) integral_t^{min(t+eps,T)} E  (trapezoidal)
// Bounded families keep every monitor within 2x its largest-epsilon value.
struct MonitorRow {
  double epsilon = 0.0;
  double nested = 0.0;
  double maxreg = 0.0;
  double scaling = 0.0;
  double windowed = 0.0;
};
struct MonitorTable {
  std::vector<MonitorRow> rows;   // ordered by decreasing epsilon
  bool bounded = false;           // all columns within 2x the first row
};
MonitorTable estimate_monitors(const std::vector<Trajectory>& family,
                               const std::vector<double>& epsilons,
                               const WideProblem& problem);

// Value of the free-evolution minimization from state v:
//   V_eps(v) = (1/eps) min W over trajectories with u_0 = v.
// Satisfies 0 <= V_eps(v) <= E(v) (the constant trajectory gives the exact
// discrete bound kappa(1-kappa^N) E(v)).
double value_function(const WideProblem& problem, const std::vector<double>& v,
                      double epsilon);

// Integrated dynamic-programming defect along the minimizer from u0:
//   max_i [ V_eps(u_i) + (nu/2) sum_{s<=i} tau|delta u_s|^2 - E(u0) ]_+
// sampled at sample_count nodes (quadratic energies evaluate V through its
// exact quadratic form, one solve total).
double dpp_defect(const WideProblem& problem, double epsilon,
                  int sample_count = 50);

// Null-minimization residual of the gradient-flow variational principle
// (rho=0, Quadratic(nu=1)):
//   F(u) = E(u_N) - E(u0) + 0.5 sum tau|delta u|^2
//          + 0.5 sum tau|grad E(u)|^2  >= 0 for convex E,
// zero exactly on the gradient flow.
double edp_residual(const Trajectory& u, const WideProblem& problem);

// Rate-independent solution checks (rho=0, OneHomogeneous(alpha), per-node
// forcing): sampled global stability
//   E(t_i, u_i) <= E(t_i, c) + alpha|c - u_i| + slack
// over m random competitors per node (radius 3x trajectory diameter,
// seeded), and the energy-balance defect
//   |E(t_N, u_N) + sum alpha|u_i - u_{i-1}| - E(0, u0)
//     + sum tau f'_i . u_i|,  f'_i = (f_i - f_{i-1})/tau.
struct EnergeticChecks {
  double worst_stability_violation = 0.0;  // max over nodes/samples
  double balance_defect = 0.0;
  bool stability_pass = false;
  bool balance_pass = false;
};
EnergeticChecks energetic_checks(const Trajectory& u,
                                 const WideProblem& problem, int samples,
                                 double stability_slack, double balance_tol,
                                 std::uint64_t seed = 1);

}  // namespace wide
