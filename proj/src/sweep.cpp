#include "wide/sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <vector>

#include "wide/errors.hpp"
#include "wide/parallel.hpp"
#include "wide/weights.hpp"

namespace wide {

double trajectory_distance(const Trajectory& u, const ReferenceSolution& ref,
                           ErrorNorm norm) {
  const int d = u.dim;
  const TimeGrid& g = u.grid;
  double sup = 0.0;
  double sq = 0.0;
  for (long i = 0; i <= g.steps; ++i) {
    const std::vector<double> r = ref.at(g.node(i));
    if (static_cast<int>(r.size()) != d) {
      throw ShapeMismatch("reference dimension does not match trajectory");
    }
    const double* ui = u.node(i);
    double node_sq = 0.0;
    for (int c = 0; c < d; ++c) {
      const double diff = ui[c] - r[c];
      sup = std::max(sup, std::abs(diff));
      node_sq += diff * diff;
    }
    sq += g.tau * node_sq;
  }
  return norm == ErrorNorm::Sup ? sup : std::sqrt(sq);
}

SweepResult sweep(const WideProblem& problem,
                  const std::vector<double>& epsilons,
                  const ReferenceSolution& reference, ErrorNorm norm,
                  bool force_banded) {
  if (epsilons.size() < 3) {
    throw InsufficientSweep("a sweep needs at least 3 epsilon values");
  }
  for (size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw NonPositiveEpsilon("sweep epsilon <= 0");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw InvalidParams("sweep epsilons must be strictly decreasing");
    }
  }
  problem.validate();

  const int n = static_cast<int>(epsilons.size());
  SweepResult result;
  result.epsilons = epsilons;
  result.errors.assign(epsilons.size(), 0.0);
  result.reference = reference.name;

  std::vector<std::exception_ptr> failures(epsilons.size());
  const int threads = std::min(num_workers(), n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      const WeightScheme w = weights_for(problem, epsilons[static_cast<size_t>(i)]);
      const SolveResult solved =
          force_banded ? solve_quadratic(problem, w) : solve_auto(problem, w);
      result.errors[static_cast<size_t>(i)] =
          trajectory_distance(solved.trajectory, reference, norm);
    } catch (...) {
      failures[static_cast<size_t>(i)] = std::current_exception();
    }
  }
  for (size_t i = 0; i < failures.size(); ++i) {
    if (failures[i]) {
      try {
        std::rethrow_exception(failures[i]);
      } catch (const std::exception& e) {
        throw SolveFailed("sweep solve failed at epsilon = " +
                          std::to_string(epsilons[i]) + ": " + e.what());
      }
    }
  }

  bool degenerate = true;
  for (double err : result.errors) {
    if (!std::isfinite(err)) throw SolveFailed("non-finite sweep error");
    if (err >= 1e-13) degenerate = false;
  }
  result.degenerate = degenerate;
  if (!degenerate) {
    fit_loglog(result.epsilons, result.errors, result.fitted_exponent,
               result.fit_residual);
  }
  return result;
}

void fit_loglog(const std::vector<double>& eps, const std::vector<double>& err,
                double& slope, double& rms_residual) {
  if (eps.size() != err.size() || eps.size() < 3) {
    throw InsufficientSweep("log-log fit needs at least 3 matched points");
  }
  const size_t n = eps.size();
  std::vector<double> x(n), y(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(err[i] > 0.0)) {
      throw InvalidParams("log-log fit needs positive data");
    }
    x[i] = std::log(eps[i]);
    y[i] = std::log(err[i]);
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (slope * x[i] + intercept);
    ss += r * r;
  }
  rms_residual = std::sqrt(ss / static_cast<double>(n));
}

RateReport rate_report(double lambda, double u0, double horizon,
                       const std::vector<double>& epsilons) {
  if (epsilons.size() < 3) {
    throw InsufficientSweep("a rate study needs at least 3 epsilon values");
  }
  if (!(horizon > 0.0)) throw NonPositiveHorizon("horizon must be positive");
  if (lambda < 0.0) throw InvalidParams("rate study is for lambda >= 0");

  RateReport report;
  report.rows.reserve(epsilons.size());
  const double nu = 1.0;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw NonPositiveEpsilon("rate epsilon <= 0");
    const double tau_target = eps * eps;
    const long steps = std::max<long>(2, std::llround(horizon / tau_target));
    const double tau = horizon / static_cast<double>(steps);

    // Streaming tridiagonal solve of the classical system: interior rows
    // (-nu(eps+tau), nu(2eps+tau)+lambda tau^2, -nu eps), final row
    // (-nu eps, nu eps); only the back-substitution state is stored.
    const double sub = -(nu * (eps + tau));
    const double diag = nu * (2.0 * eps + tau) + lambda * tau * tau;
    const double sup_c = -(nu * eps);
    std::vector<double> m(static_cast<size_t>(steps));  // sup / pivot
    std::vector<double> rhs(static_cast<size_t>(steps));
    double pivot = diag;
    if (pivot == 0.0) throw SingularSystem("zero pivot in rate solve");
    m[0] = sup_c / pivot;
    rhs[0] = nu * (eps + tau) * u0 / pivot;
    for (long r = 1; r < steps; ++r) {
      const double a = r == steps - 1 ? -(nu * eps) : sub;
      const double b = r == steps - 1 ? nu * eps : diag;
      pivot = b - a * m[static_cast<size_t>(r - 1)];
      if (pivot == 0.0 || !std::isfinite(pivot)) {
        throw SingularSystem("zero pivot in rate solve");
      }
      m[static_cast<size_t>(r)] = sup_c / pivot;
      rhs[static_cast<size_t>(r)] =
          (0.0 - a * rhs[static_cast<size_t>(r - 1)]) / pivot;
    }
    // Back-substitute in place and take the sup distance to u0 e^{-lambda t}.
    double sup_err = 0.0;
    double next = 0.0;
    for (long r = steps - 1; r >= 0; --r) {
      const double val =
          rhs[static_cast<size_t>(r)] -
          (r == steps - 1 ? 0.0 : m[static_cast<size_t>(r)] * next);
      next = val;
      const double t = tau * static_cast<double>(r + 1);
      sup_err = std::max(sup_err, std::abs(val - u0 * std::exp(-lambda * t)));
    }

    RateRow row;
    row.epsilon = eps;
    row.tau = tau;
    row.steps = steps;
    row.sup_error = sup_err;
    report.rows.push_back(row);
  }

  bool exact = true;
  for (const RateRow& row : report.rows) {
    if (row.sup_error >= 1e-13) exact = false;
  }
  report.exact = exact;
  if (!exact) {
    std::vector<double> eps, err;
    for (const RateRow& row : report.rows) {
      eps.push_back(row.epsilon);
      err.push_back(row.sup_error);
    }
    double slope = 0.0, rms = 0.0;
    fit_loglog(eps, err, slope, rms);
    report.fitted_rate = slope;
  }
  return report;
}

double tail_sensitivity(const WideProblem& problem, double epsilon,
                        double perturbation) {
  problem.validate();
  if (!(perturbation > 0.0)) throw InvalidParams("perturbation must be > 0");
  const WeightScheme w = weights_for(problem, epsilon);
  const long N = problem.grid.steps;
  const long mid = N / 2;
  const int d = problem.dim();

  const SolveResult base = solve_auto(problem, w);

  WideProblem shifted = problem;
  std::vector<double> forcing = problem.energy.forcing;
  if (forcing.empty()) {
    forcing.assign(static_cast<size_t>(N + 1) * d, 0.0);
  }
  for (long i = mid + 1; i <= N; ++i) {
    for (int c = 0; c < d; ++c) {
      forcing[static_cast<size_t>(i) * d + c] += perturbation;
    }
  }
  shifted.energy = with_forcing(problem.energy, std::move(forcing));
  const SolveResult bumped = solve_auto(shifted, w);

  double delta = 0.0;
  for (int c = 0; c < d; ++c) {
    delta = std::max(delta, std::abs(bumped.trajectory.node(mid)[c] -
                                     base.trajectory.node(mid)[c]));
  }
  return delta / perturbation;
}

}  // namespace wide
