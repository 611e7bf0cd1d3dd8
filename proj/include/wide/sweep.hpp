#pragma once

#include <string>
#include <vector>

#include "wide/minimize.hpp"
#include "wide/oracles.hpp"
#include "wide/problem.hpp"

namespace wide {

enum class ErrorNorm { Sup, L2 };

struct SweepResult {
  std::vector<double> epsilons;   // strictly decreasing
  std::vector<double> errors;     // per-epsilon distance to the reference
  double fitted_exponent = 0.0;   // OLS slope on (log eps, log error)
  double fit_residual = 0.0;      // RMS residual of the fit
  bool degenerate = false;        // all errors below 1e-13: reported, not fit
  std::string reference;
};

// Distance between a trajectory and a reference on the trajectory's grid.
double trajectory_distance(const Trajectory& u, const ReferenceSolution& ref,
                           ErrorNorm norm);

// Solves the problem at each epsilon (auto-routed solver, or the classical
// banded path when force_banded is set) and fits the convergence exponent.
// Per-epsilon solves run in parallel; aggregation is deterministic.
SweepResult sweep(const WideProblem& problem,
                  const std::vector<double>& epsilons,
                  const ReferenceSolution& reference, ErrorNorm norm,
                  bool force_banded = false);

// Ordinary least squares slope of log(err) against log(eps).
void fit_loglog(const std::vector<double>& eps,
                const std::vector<double>& err, double& slope,
                double& rms_residual);

// Continuous-rate study: tau coupled to eps (tau = eps^2), scalar linear
// family solved by the streaming banded path against the exact causal
// solution; reports per-epsilon sup errors and the fitted rate.
struct RateRow {
  double epsilon = 0.0;
  double tau = 0.0;
  long steps = 0;
  double sup_error = 0.0;
};
struct RateReport {
  std::vector<RateRow> rows;
  double fitted_rate = 0.0;
  bool exact = false;  // all errors at machine scale (rate undefined)
};
RateReport rate_report(double lambda, double u0, double horizon,
                       const std::vector<double>& epsilons);

// Sensitivity of the minimizer at t = T/2 to a forcing perturbation
// supported on (T/2, T], relative to the perturbation size — the
// computable causality-restoration measure (decays like kappa^{N/2}).
double tail_sensitivity(const WideProblem& problem, double epsilon,
                        double perturbation);

}  // namespace wide
