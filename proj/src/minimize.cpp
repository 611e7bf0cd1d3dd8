#include "wide/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "wide/banded.hpp"
#include "wide/errors.hpp"

namespace wide {

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void add_scaled_free(Trajectory& u, const std::vector<double>& s, double t,
                     long i0, int d) {
  for (long j = i0; j <= u.grid.steps; ++j) {
    double* uj = u.node(j);
    const double* sj = s.data() + static_cast<size_t>(j - i0) * d;
    for (int c = 0; c < d; ++c) uj[c] += t * sj[c];
  }
}

void check_singularity_bound(double lambda, double tau) {
  if (lambda < 0.0 && tau >= -1.0 / lambda) {
    throw SingularityRisk(
        "negative stiffness requires the step below the singularity bound");
  }
}

}  // namespace

const char* solver_name(SolverPath path) {
  switch (path) {
    case SolverPath::BandedDirect:
      return "BandedDirect";
    case SolverPath::Newton:
      return "Newton";
    case SolverPath::ProxSplit:
      return "ProxSplit";
    case SolverPath::BruteForce:
      return "BruteForce";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Direct banded solve for quadratic problems.
// ---------------------------------------------------------------------------

namespace {

// Scalar rho=0 path: the tridiagonal system is eliminated in a forward
// streaming sweep (only the modified superdiagonal and rhs are stored), so
// very long grids cost two O(N) arrays plus the trajectory itself.
SolveResult solve_quadratic_scalar(const WideProblem& problem,
                                   const WeightScheme& w) {
  const double lambda = problem.energy.quadratic_matrix[0];
  const double nu = problem.dissipation.nu;
  const double eps = w.epsilon;
  const double tau = problem.grid.tau;
  check_singularity_bound(lambda, tau);

  const long n = problem.grid.steps;  // rows = nodes 1..N
  const double diag_interior = nu * (2.0 * eps + tau) + lambda * tau * tau;
  const double sub_interior = -(nu * (eps + tau));
  const double sup_entry = -(nu * eps);
  const bool forced = problem.energy.has_forcing();

  auto row_b = [&](long r) -> double {
    double b = r == 0 ? nu * (eps + tau) * problem.u0[0] : 0.0;
    if (forced && r + 1 < n) b += tau * tau * problem.energy.forcing_at(r + 1)[0];
    return b;
  };

  std::vector<double> c(static_cast<size_t>(n), 0.0);
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  double denom = diag_interior;
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw SingularSystem("zero pivot in streaming elimination");
  }
  c[0] = sup_entry / denom;
  x[0] = row_b(0) / denom;
  for (long r = 1; r < n; ++r) {
    const double sub = r == n - 1 ? -(nu * eps) : sub_interior;
    const double diag = r == n - 1 ? nu * eps : diag_interior;
    denom = diag - sub * c[static_cast<size_t>(r - 1)];
    if (denom == 0.0 || !std::isfinite(denom)) {
      throw SingularSystem("zero pivot in streaming elimination");
    }
    if (r < n - 1) c[static_cast<size_t>(r)] = sup_entry / denom;
    x[static_cast<size_t>(r)] =
        (row_b(r) - sub * x[static_cast<size_t>(r - 1)]) / denom;
  }
  for (long r = n - 2; r >= 0; --r) {
    x[static_cast<size_t>(r)] -=
        c[static_cast<size_t>(r)] * x[static_cast<size_t>(r + 1)];
  }
  c.clear();
  c.shrink_to_fit();

  // Solution residual of the assembled rows, relative to the load scale.
  double res = 0.0;
  double bscale = 0.0;
  auto xat = [&](long r) -> double {
    return r < 0 ? problem.u0[0] : x[static_cast<size_t>(r)];
  };
  for (long r = 0; r < n; ++r) {
    double av;
    if (r == n - 1) {
      av = -(nu * eps) * xat(r - 1) + nu * eps * xat(r);
    } else {
      av = diag_interior * xat(r) + sup_entry * xat(r + 1) +
           (r > 0 ? sub_interior * xat(r - 1) : 0.0);
    }
    const double b = row_b(r);
    res = std::max(res, std::abs(av - b));
    bscale = std::max(bscale, std::abs(b));
  }

  Trajectory traj = Trajectory::zeros(problem.grid, 1);
  traj.node(0)[0] = problem.u0[0];
  for (long r = 0; r < n; ++r) traj.node(r + 1)[0] = x[static_cast<size_t>(r)];

  SolveResult out;
  out.trajectory = std::move(traj);
  out.report.objective = eval_functional(problem, w, out.trajectory);
  out.report.iterations = 1;
  out.report.residual = res / (1.0 + bscale);
  out.report.solver = SolverPath::BandedDirect;
  out.report.converged = true;
  out.report.weight_prefactor_dropped = w.dropped_prefactor();
  return out;
}

SolveResult solve_quadratic_blocks(const WideProblem& problem,
                                   const WeightScheme& w) {
  BandedSystem sys = assemble_linear_system_blocks(problem, w);
  std::vector<double> x = sys.b;
  {
    BandedMatrix factor = sys.A;  // keep sys.A for the residual check
    factor.solve_in_place(x);
  }
  std::vector<double> ax(x.size());
  sys.A.apply(x.data(), ax.data());
  double res = 0.0, bscale = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    res = std::max(res, std::abs(ax[i] - sys.b[i]));
    bscale = std::max(bscale, std::abs(sys.b[i]));
  }

  const int d = problem.dim();
  Trajectory traj = Trajectory::zeros(problem.grid, d);
  for (int c = 0; c < d; ++c) traj.node(0)[c] = problem.u0[c];
  for (long j = 1; j <= problem.grid.steps; ++j) {
    for (int c = 0; c < d; ++c) {
      traj.node(j)[c] = x[static_cast<size_t>(j - 1) * d + c];
    }
  }

  SolveResult out;
  out.trajectory = std::move(traj);
  out.report.objective = eval_functional(problem, w, out.trajectory);
  out.report.iterations = 1;
  out.report.residual = res / (1.0 + bscale);
  out.report.solver = SolverPath::BandedDirect;
  out.report.converged = true;
  out.report.weight_prefactor_dropped = w.dropped_prefactor();
  return out;
}

// rho>0 quadratic problems: the stationarity system is linear; one banded
// solve of the scaled-residual equations from the constrained extension is
// exact.
SolveResult solve_quadratic_inertial(const WideProblem& problem,
                                     const WeightScheme& w) {
  Trajectory u = problem.constrained_trajectory();
  std::vector<double> r = scaled_residual(problem, w, u);
  for (double& v : r) v = -v;
  BandedMatrix J = scaled_jacobian(problem, w, u);
  J.solve_in_place(r);
  add_scaled_free(u, r, 1.0, problem.first_free(), problem.dim());
  const std::vector<double> post = scaled_residual(problem, w, u);

  SolveResult out;
  out.trajectory = std::move(u);
  out.report.objective = eval_functional(problem, w, out.trajectory);
  out.report.iterations = 1;
  out.report.residual = inf_norm(post);
  out.report.solver = SolverPath::BandedDirect;
  out.report.converged = true;
  out.report.weight_prefactor_dropped = w.dropped_prefactor();
  return out;
}

}  // namespace

SolveResult solve_quadratic(const WideProblem& problem,
                            const WeightScheme& w) {
  problem.validate();
  if (problem.dissipation.kind != DissipationKind::Quadratic) {
    throw ShapeMismatch("direct solve requires quadratic dissipation");
  }
  if (!problem.energy.is_quadratic()) {
    throw ShapeMismatch("direct solve requires an exact quadratic energy");
  }
  if (problem.rho > 0.0) return solve_quadratic_inertial(problem, w);
  if (!(problem.dissipation.nu > 0.0)) {
    throw InvalidParams("direct solve requires a positive viscosity");
  }
  if (problem.dim() == 1) return solve_quadratic_scalar(problem, w);
  return solve_quadratic_blocks(problem, w);
}

// ---------------------------------------------------------------------------
// Damped Newton on the scaled stationarity residual.
// ---------------------------------------------------------------------------

namespace {

struct NewtonOptions {
  double tol = -1.0;
  long max_iters = 300;
  SolverPath label = SolverPath::Newton;
  bool step_too_small_error = false;
  bool force_residual_merit = false;
};

// Merit directional derivative along s at the current point.
double merit_slope(bool objective_merit, const WideProblem& problem,
                   const WeightScheme& w, const Trajectory& u,
                   const std::vector<double>& R, const std::vector<double>& s) {
  const long i0 = problem.first_free();
  const int d = problem.dim();
  if (objective_merit) {
    // Gradient rows are tau*e_j*c_eps times the scaled residual rows.
    double g = 0.0;
    for (long j = i0; j <= u.grid.steps; ++j) {
      const double scale =
          u.grid.tau * w.e[static_cast<size_t>(j)] * w.c_eps;
      const double* rj = R.data() + static_cast<size_t>(j - i0) * d;
      const double* sj = s.data() + static_cast<size_t>(j - i0) * d;
      for (int c = 0; c < d; ++c) g += scale * rj[c] * sj[c];
    }
    return g;
  }
  // d/dt 0.5|R(u + t s)|^2 at t = 0 is R^T J s.
  BandedMatrix J = scaled_jacobian(problem, w, u);
  std::vector<double> Js(s.size());
  J.apply(s.data(), Js.data());
  return dot(R, Js);
}

// Levenberg normal-equation direction (J^T J + mu I) s = -J^T R: always a
// descent direction for the residual merit.
std::vector<double> lm_direction(const WideProblem& problem,
                                 const WeightScheme& w, const Trajectory& u,
                                 const std::vector<double>& R, double mu) {
  BandedMatrix J = scaled_jacobian(problem, w, u);
  const long n = J.n;
  const int beta = J.kl;
  BandedMatrix JtJ = BandedMatrix::zeros(n, 2 * beta, 2 * beta);
  for (long a = 0; a < n; ++a) {
    const long blo = std::max(0L, a - 2 * beta);
    const long bhi = std::min(n - 1, a + 2 * beta);
    for (long b = blo; b <= bhi; ++b) {
      const long rlo = std::max(0L, std::max(a, b) - beta);
      const long rhi = std::min(n - 1, std::min(a, b) + beta);
      double sum = 0.0;
      for (long r = rlo; r <= rhi; ++r) sum += J.get(r, a) * J.get(r, b);
      if (sum != 0.0) JtJ.at(a, b) = sum;
    }
    JtJ.at(a, a) += mu;
  }
  std::vector<double> rhs(static_cast<size_t>(n), 0.0);
  for (long a = 0; a < n; ++a) {
    const long rlo = std::max(0L, a - beta);
    const long rhi = std::min(n - 1, a + beta);
    double sum = 0.0;
    for (long r = rlo; r <= rhi; ++r) {
      sum += J.get(r, a) * R[static_cast<size_t>(r)];
    }
    rhs[static_cast<size_t>(a)] = -sum;
  }
  JtJ.solve_in_place(rhs);
  return rhs;
}

// Shifted true-Hessian direction (H + sigma I) s = -grad W: classic
// Levenberg-style identity shift sized from a Gershgorin bound on the
// smallest eigenvalue; keeps the banded structure and guarantees an
// objective descent direction for sigma large enough.
std::vector<double> shifted_hessian_direction(const WideProblem& problem,
                                              const WeightScheme& w,
                                              const Trajectory& u,
                                              double extra_shift) {
  BandedMatrix H = hessian_matrix(problem, w, u);
  double lam_min = std::numeric_limits<double>::infinity();
  for (long i = 0; i < H.n; ++i) {
    double off = 0.0;
    const long lo = std::max(0L, i - H.kl);
    const long hi = std::min(H.n - 1, i + H.ku);
    for (long j = lo; j <= hi; ++j) {
      if (j != i) off += std::abs(H.get(i, j));
    }
    lam_min = std::min(lam_min, H.get(i, i) - off);
  }
  const double sigma =
      (lam_min < 0.0 ? -lam_min : 0.0) + 1e-8 + extra_shift;
  for (long i = 0; i < H.n; ++i) H.at(i, i) += sigma;
  std::vector<double> rhs = eval_gradient(problem, w, u);
  for (double& v : rhs) v = -v;
  H.solve_in_place(rhs);
  return rhs;
}

SolveResult newton_core(const WideProblem& problem, const WeightScheme& w,
                        const Trajectory& init, const NewtonOptions& opt) {
  problem.validate();
  if (problem.dissipation.kind == DissipationKind::OneHomogeneous) {
    throw NonSmoothDissipation(
        "rate-independent dissipation needs the proximal solver");
  }
  Trajectory u = init;
  std::vector<double> R = scaled_residual(problem, w, u);
  if (!all_finite(R)) {
    throw NonFiniteValue("stationarity residual non-finite at the start");
  }
  double rnorm = inf_norm(R);
  const double tol_eff = opt.tol > 0.0 ? opt.tol : 1e-8 * (1.0 + rnorm);
  // The objective is a valid line-search merit only while the terminal
  // weight keeps every node's contribution measurable against unit
  // roundoff of the total; past that the weighted objective cannot see
  // late-node progress and the squared stationarity residual takes over.
  // The static cutoff handles the clear-cut cases; marginally representable
  // tails are caught at run time by the stall detector below, which flips
  // the merit once the objective phase stops making residual progress.
  bool objective_merit =
      !opt.force_residual_merit &&
      w.e[static_cast<size_t>(problem.grid.steps)] >= 1e-8;
  auto merit_value = [&](const Trajectory& v,
                         const std::vector<double>& Rv) -> double {
    return objective_merit ? eval_functional(problem, w, v)
                           : 0.5 * dot(Rv, Rv);
  };
  double merit = merit_value(u, R);
  const long i0 = problem.first_free();
  const int d = problem.dim();
  long iters = 0;
  long stalled = 0;
  bool converged = rnorm <= tol_eff;
  const bool trace = std::getenv("WIDE_NEWTON_TRACE") != nullptr;

  while (!converged && iters < opt.max_iters) {
    ++iters;
    bool accepted = false;
    int used_attempt = -1;
    double used_t = 0.0;
    // Direction ladder: Newton step first, then increasingly regularized
    // fallbacks until a backtracked step is accepted.
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      std::vector<double> s;
      bool have_dir = false;
      if (attempt == 0) {
        BandedMatrix J = scaled_jacobian(problem, w, u);
        std::vector<double> rhs(R);
        for (double& v : rhs) v = -v;
        try {
          J.solve_in_place(rhs);
          s = std::move(rhs);
          have_dir = all_finite(s);
        } catch (const SingularSystem&) {
          have_dir = false;
        }
      } else {
        const double level = std::pow(10.0, attempt - 1);
        try {
          if (objective_merit) {
            s = shifted_hessian_direction(problem, w, u, level * 1e-6 * rnorm);
          } else {
            s = lm_direction(problem, w, u, R, level * 1e-4 * (1.0 + rnorm));
          }
          have_dir = all_finite(s);
        } catch (const SingularSystem&) {
          have_dir = false;
        }
      }
      if (!have_dir) continue;
      const double slope = merit_slope(objective_merit, problem, w, u, R, s);
      if (!(slope < 0.0)) continue;

      double t = 1.0;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        Trajectory trial = u;
        add_scaled_free(trial, s, t, i0, d);
        std::vector<double> Rt;
        double mt;
        try {
          Rt = scaled_residual(problem, w, trial);
          if (!all_finite(Rt)) continue;
          mt = merit_value(trial, Rt);
        } catch (const NonFiniteValue&) {
          continue;
        }
        if (mt <= merit + 1e-4 * t * slope) {
          u = std::move(trial);
          R = std::move(Rt);
          merit = mt;
          accepted = true;
          used_attempt = attempt;
          used_t = t;
          break;
        }
      }
    }
    if (!accepted) {
      if (objective_merit) {
        // The objective phase has run out of representable decrease; finish
        // under the residual merit, which measures exactly what the
        // convergence test measures.
        objective_merit = false;
        merit = merit_value(u, R);
        stalled = 0;
        continue;
      }
      if (opt.step_too_small_error) {
        throw StepTooSmall("no step of representable size decreases the merit");
      }
      throw LineSearchFailure("backtracking found no acceptable step");
    }
    const double prev_rnorm = rnorm;
    rnorm = inf_norm(R);
    converged = rnorm <= tol_eff;
    if (objective_merit && !converged) {
      // Accepted steps that are microscopic and barely move the residual
      // mean the objective no longer resolves the remaining error.
      const bool crawling = used_t <= 1e-3 && rnorm > 0.9 * prev_rnorm;
      stalled = crawling ? stalled + 1 : 0;
      if (stalled >= 5) {
        objective_merit = false;
        merit = merit_value(u, R);
        stalled = 0;
      }
    }
    if (trace) {
      std::fprintf(stderr,
                   "[newton] it=%ld attempt=%d t=%.3e rnorm=%.6e merit=%.9e%s\n",
                   iters, used_attempt, used_t, rnorm, merit,
                   objective_merit ? "" : " [resid]");
    }
  }
  if (!converged) {
    throw MaxIterations("stationarity residual above tolerance at the cap");
  }

  SolveResult out;
  out.trajectory = std::move(u);
  out.report.objective = eval_functional(problem, w, out.trajectory);
  out.report.iterations = iters;
  out.report.residual = rnorm;
  out.report.solver = opt.label;
  out.report.converged = true;
  out.report.weight_prefactor_dropped = w.dropped_prefactor();
  return out;
}

}  // namespace

SolveResult solve_newton(const WideProblem& problem, const WeightScheme& w,
                         const Trajectory& init, double tol) {
  if (problem.dissipation.kind == DissipationKind::PowerLaw &&
      problem.dissipation.p < 2.0) {
    throw NonSmoothDissipation(
        "power-law rates below quadratic growth need the proximal solver");
  }
  NewtonOptions opt;
  opt.tol = tol;
  return newton_core(problem, w, init, opt);
}

// ---------------------------------------------------------------------------
// Proximal solver: primal-dual active set for rate-independent dissipation,
// floored-curvature Newton for slow power-law growth.
// ---------------------------------------------------------------------------

namespace {

enum class RateState : signed char { Stick = 0, SlidePlus = 1, SlideMinus = -1 };

struct PdasWorkspace {
  long N = 0;
  int d = 1;
  double a = 0.0;      // ehat / tau
  double kappa = 0.0;
  double alpha = 0.0;
  std::vector<RateState> state;       // (node-1)*d + c
  std::vector<double> u;              // N*d free node values
  std::vector<double> zeta;           // N*d subgradient values
};

// One primal-dual solve with the current active set: the interleaved
// (u, zeta) system is banded with half-bandwidth 3d.
void pdas_solve_once(const WideProblem& problem, PdasWorkspace& ws,
                     const std::vector<double>& lin_matrix,
                     const std::vector<double>& lin_rhs) {
  const long N = ws.N;
  const int d = ws.d;
  const long n = 2L * d * N;
  BandedMatrix A = BandedMatrix::zeros(n, 3 * d, 3 * d);
  std::vector<double> rhs(static_cast<size_t>(n), 0.0);

  for (long j = 1; j <= N; ++j) {
    const long m = j - 1;
    const long base = m * 2 * d;
    const double* Hj = lin_matrix.data() + static_cast<size_t>(m) * d * d;
    const double* cj = lin_rhs.data() + static_cast<size_t>(m) * d;
    for (int c = 0; c < d; ++c) {
      const long gu = base + c;
      A.at(gu, base + d + c) = ws.a;
      if (j + 1 <= N) A.at(gu, base + 2 * d + d + c) = -ws.a * ws.kappa;
      for (int b = 0; b < d; ++b) {
        const double val = Hj[static_cast<size_t>(c) * d + b];
        if (val != 0.0) A.at(gu, base + b) += val;
      }
      rhs[static_cast<size_t>(gu)] = cj[c];

      const long gz = base + d + c;
      const RateState st = ws.state[static_cast<size_t>(m) * d + c];
      if (st == RateState::Stick) {
        A.at(gz, base + c) = 1.0;
        if (j >= 2) {
          A.at(gz, base - 2 * d + c) = -1.0;
          rhs[static_cast<size_t>(gz)] = 0.0;
        } else {
          rhs[static_cast<size_t>(gz)] = problem.u0[c];
        }
      } else {
        A.at(gz, gz) = 1.0;
        rhs[static_cast<size_t>(gz)] =
            st == RateState::SlidePlus ? ws.alpha : -ws.alpha;
      }
    }
  }
  A.solve_in_place(rhs);
  for (long m = 0; m < N; ++m) {
    for (int c = 0; c < d; ++c) {
      ws.u[static_cast<size_t>(m) * d + c] =
          rhs[static_cast<size_t>(m * 2 * d + c)];
      ws.zeta[static_cast<size_t>(m) * d + c] =
          rhs[static_cast<size_t>(m * 2 * d + d + c)];
    }
  }
}

SolveResult solve_prox_active_set(const WideProblem& problem,
                                  const WeightScheme& w, const Trajectory& init,
                                  double tol) {
  if (problem.rho > 0.0) {
    throw UnsupportedCombination(
        "rate-independent dissipation is supported for first-order problems");
  }
  const long N = problem.grid.steps;
  const int d = problem.dim();
  const double tol_eff = tol > 0.0 ? tol : 1e-7;

  PdasWorkspace ws;
  ws.N = N;
  ws.d = d;
  ws.a = w.eps_hat / problem.grid.tau;
  ws.kappa = w.kappa;
  ws.alpha = problem.dissipation.alpha;
  ws.state.assign(static_cast<size_t>(N) * d, RateState::Stick);
  ws.u.assign(static_cast<size_t>(N) * d, 0.0);
  ws.zeta.assign(static_cast<size_t>(N) * d, 0.0);

  const bool quadratic = problem.energy.is_quadratic();
  // Linearization base: free nodes of the given start.
  std::vector<double> base(static_cast<size_t>(N) * d);
  for (long j = 1; j <= N; ++j) {
    const double* nj = init.node(j);
    for (int c = 0; c < d; ++c) base[static_cast<size_t>(j - 1) * d + c] = nj[c];
  }

  std::vector<double> lin_matrix(static_cast<size_t>(N) * d * d);
  std::vector<double> lin_rhs(static_cast<size_t>(N) * d);
  std::vector<double> egrad(d), eh(static_cast<size_t>(d) * d);
  long total_inner = 0;
  const int outer_cap = quadratic ? 1 : 50;

  for (int outer = 0; outer < outer_cap; ++outer) {
    // Freeze the energy model at the base: exact for quadratic energies,
    // first-order expansion grad E(b) + Hess E(b)(u - b) otherwise.
    for (long m = 0; m < N; ++m) {
      const double* bm = base.data() + static_cast<size_t>(m) * d;
      double* Hm = lin_matrix.data() + static_cast<size_t>(m) * d * d;
      double* cm = lin_rhs.data() + static_cast<size_t>(m) * d;
      const double* f = problem.energy.forcing_at(m + 1);
      if (quadratic) {
        for (int i = 0; i < d * d; ++i) {
          Hm[i] = problem.energy.quadratic_matrix[static_cast<size_t>(i)];
        }
        for (int c = 0; c < d; ++c) cm[c] = f ? f[c] : 0.0;
      } else {
        problem.energy.gradient(std::span<const double>(bm, d), egrad);
        if (problem.energy.has_hessian()) {
          problem.energy.hessian(std::span<const double>(bm, d), eh);
        } else {
          // Finite-difference curvature of the gradient.
          std::vector<double> up(bm, bm + d), gp(d), gm(d);
          for (int c = 0; c < d; ++c) {
            const double h = 1e-6 * (1.0 + std::abs(bm[c]));
            up[c] = bm[c] + h;
            problem.energy.gradient(up, gp);
            up[c] = bm[c] - h;
            problem.energy.gradient(up, gm);
            up[c] = bm[c];
            for (int r = 0; r < d; ++r) {
              eh[static_cast<size_t>(r) * d + c] = (gp[r] - gm[r]) / (2.0 * h);
            }
          }
        }
        for (int i = 0; i < d * d; ++i) Hm[i] = eh[static_cast<size_t>(i)];
        for (int c = 0; c < d; ++c) {
          double hb = 0.0;
          for (int b = 0; b < d; ++b) {
            hb += eh[static_cast<size_t>(c) * d + b] * bm[b];
          }
          cm[c] = (f ? f[c] : 0.0) - egrad[c] + hb;
        }
      }
    }

    // Active-set fixed point with the frozen model.
    bool stable = false;
    for (int inner = 0; inner < 200 && !stable; ++inner) {
      pdas_solve_once(problem, ws, lin_matrix, lin_rhs);
      ++total_inner;
      long flips = 0;
      for (long m = 0; m < N; ++m) {
        for (int c = 0; c < d; ++c) {
          const size_t idx = static_cast<size_t>(m) * d + c;
          const double prev =
              m == 0 ? problem.u0[c] : ws.u[static_cast<size_t>(m - 1) * d + c];
          const double du = ws.u[idx] - prev;
          const double scale = 1.0 + std::abs(ws.u[idx]);
          RateState& st = ws.state[idx];
          if (st == RateState::Stick) {
            if (ws.zeta[idx] > ws.alpha * (1.0 + 1e-10)) {
              st = RateState::SlidePlus;
              ++flips;
            } else if (ws.zeta[idx] < -ws.alpha * (1.0 + 1e-10)) {
              st = RateState::SlideMinus;
              ++flips;
            }
          } else if (st == RateState::SlidePlus) {
            if (du < -1e-13 * scale) {
              st = RateState::Stick;
              ++flips;
            }
          } else {
            if (du > 1e-13 * scale) {
              st = RateState::Stick;
              ++flips;
            }
          }
        }
      }
      stable = flips == 0;
    }
    if (!stable) {
      throw MaxIterations("active set failed to settle");
    }
    if (quadratic) break;
    double move = 0.0;
    for (size_t i = 0; i < base.size(); ++i) {
      move = std::max(move, std::abs(base[i] - ws.u[i]));
    }
    base = ws.u;
    if (move <= 1e-12 * (1.0 + inf_norm(base))) break;
  }

  // A-posteriori certificate: subgradient inclusion and stationarity rows
  // evaluated with the true (not linearized) energy gradient.
  double defect = 0.0;
  for (long m = 0; m < N; ++m) {
    const double* um = ws.u.data() + static_cast<size_t>(m) * d;
    problem.energy.gradient(std::span<const double>(um, d), egrad);
    const double* f = problem.energy.forcing_at(m + 1);
    for (int c = 0; c < d; ++c) {
      const size_t idx = static_cast<size_t>(m) * d + c;
      const double znext =
          m + 1 < N ? ws.zeta[static_cast<size_t>(m + 1) * d + c] : 0.0;
      const double row = ws.a * (ws.zeta[idx] - ws.kappa * znext) + egrad[c] -
                         (f ? f[c] : 0.0);
      defect = std::max(defect, std::abs(row));
      const double prev =
          m == 0 ? problem.u0[c] : ws.u[static_cast<size_t>(m - 1) * d + c];
      const double du = ws.u[idx] - prev;
      const double proj =
          std::clamp(ws.zeta[idx] + du, -ws.alpha, ws.alpha);
      defect = std::max(defect, std::abs(ws.zeta[idx] - proj));
    }
  }

  Trajectory traj = Trajectory::zeros(problem.grid, d);
  for (int c = 0; c < d; ++c) traj.node(0)[c] = problem.u0[c];
  for (long j = 1; j <= N; ++j) {
    for (int c = 0; c < d; ++c) {
      traj.node(j)[c] = ws.u[static_cast<size_t>(j - 1) * d + c];
    }
  }

  SolveResult out;
  out.trajectory = std::move(traj);
  out.report.objective = eval_functional(problem, w, out.trajectory);
  out.report.iterations = total_inner;
  out.report.residual = defect;
  out.report.solver = SolverPath::ProxSplit;
  out.report.converged = defect <= tol_eff;
  out.report.weight_prefactor_dropped = w.dropped_prefactor();
  if (!out.report.converged) {
    throw MaxIterations("proximal fixed-point defect above tolerance");
  }
  return out;
}

}  // namespace

SolveResult solve_prox(const WideProblem& problem, const WeightScheme& w,
                       const Trajectory& init, double tol) {
  problem.validate();
  if (problem.dissipation.kind == DissipationKind::OneHomogeneous) {
    return solve_prox_active_set(problem, w, init, tol);
  }
  if (problem.dissipation.kind == DissipationKind::PowerLaw &&
      problem.dissipation.p < 2.0) {
    NewtonOptions opt;
    opt.tol = tol > 0.0 ? tol : 1e-7;
    opt.label = SolverPath::ProxSplit;
    opt.step_too_small_error = true;
    opt.force_residual_merit = true;
    return newton_core(problem, w, init, opt);
  }
  throw InvalidParams(
      "proximal solver expects rate-independent or slow power-law rates");
}

// ---------------------------------------------------------------------------
// Literal proximal-gradient descent (certification helper).
// ---------------------------------------------------------------------------

ProxDescentResult prox_descent_steps(const WideProblem& problem,
                                     const WeightScheme& w,
                                     const Trajectory& init, int steps) {
  problem.validate();
  const long ff = problem.first_free();
  const long N = problem.grid.steps;
  const int d = problem.dim();
  const double tau = problem.grid.tau;
  const double rate_factor = problem.rho > 0.0 ? w.eps_hat : w.epsilon;

  Trajectory u = init;
  double current = eval_functional(problem, w, u);  // validates constraints
  ProxDescentResult out;
  out.objectives.push_back(current);

  const long nrates = N - ff + 1;
  std::vector<double> rates(static_cast<size_t>(nrates) * d);
  auto load_rates = [&](const Trajectory& v) {
    for (long i = ff; i <= N; ++i) {
      const double* vi = v.node(i);
      const double* vm = v.node(i - 1);
      for (int c = 0; c < d; ++c) {
        rates[static_cast<size_t>(i - ff) * d + c] = (vi[c] - vm[c]) / tau;
      }
    }
  };
  auto rebuild = [&](const std::vector<double>& r, Trajectory& v) {
    for (long i = ff; i <= N; ++i) {
      const double* prev = v.node(i - 1);
      double* vi = v.node(i);
      for (int c = 0; c < d; ++c) {
        vi[c] = prev[c] + tau * r[static_cast<size_t>(i - ff) * d + c];
      }
    }
  };

  std::vector<double> sgrad(static_cast<size_t>(nrates) * d);
  std::vector<double> egrad(d);
  std::vector<double> trial_rates(rates.size());
  std::vector<double> shifted(d);
  double t = 1.0;

  for (int step = 0; step < steps; ++step) {
    load_rates(u);
    // Smooth-part gradient in rate variables: energy/forcing terms chain
    // through u_j = u_{ff-1} + tau * sum of rates, giving suffix sums;
    // the inertia quadratic (rho > 0) differentiates directly.
    std::fill(sgrad.begin(), sgrad.end(), 0.0);
    std::vector<double> suffix(d, 0.0);
    for (long j = N; j >= ff; --j) {
      const double* uj = u.node(j);
      problem.energy.gradient(std::span<const double>(uj, d), egrad);
      const double* f = problem.energy.forcing_at(j);
      const double scale = tau * w.e[static_cast<size_t>(j)] * w.c_eps;
      for (int c = 0; c < d; ++c) {
        suffix[c] += scale * (egrad[c] - (f ? f[c] : 0.0));
        sgrad[static_cast<size_t>(j - ff) * d + c] = tau * suffix[c];
      }
    }
    if (problem.rho > 0.0) {
      const double q = w.eps_hat * w.eps_hat * problem.rho;
      for (long i = ff; i <= N; ++i) {
        for (int c = 0; c < d; ++c) {
          const double wi = rates[static_cast<size_t>(i - ff) * d + c];
          const double wprev =
              i - 1 >= ff
                  ? rates[static_cast<size_t>(i - 1 - ff) * d + c]
                  : (u.node(i - 1)[c] - u.node(i - 2)[c]) / tau;
          const double acc = (wi - wprev) / tau;
          sgrad[static_cast<size_t>(i - ff) * d + c] +=
              w.e[static_cast<size_t>(i)] * q * acc;
          if (i + 1 <= N) {
            const double accn =
                (rates[static_cast<size_t>(i + 1 - ff) * d + c] - wi) / tau;
            sgrad[static_cast<size_t>(i - ff) * d + c] -=
                w.e[static_cast<size_t>(i + 1)] * q * accn;
          }
        }
      }
    }

    bool accepted = false;
    t = std::min(t * 2.0, 1e6);
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      for (long i = ff; i <= N; ++i) {
        const size_t off = static_cast<size_t>(i - ff) * d;
        for (int c = 0; c < d; ++c) {
          shifted[static_cast<size_t>(c)] = rates[off + c] - t * sgrad[off + c];
        }
        const double s = t * tau * w.e[static_cast<size_t>(i)] * rate_factor;
        problem.dissipation.prox(shifted, s,
                                 std::span<double>(trial_rates.data() + off, d));
      }
      Trajectory trial = u;
      rebuild(trial_rates, trial);
      double val;
      try {
        val = eval_functional(problem, w, trial);
      } catch (const NonFiniteValue&) {
        continue;
      }
      if (val <= current) {
        u = std::move(trial);
        current = val;
        accepted = true;
        break;
      }
    }
    // A stalled step keeps the trajectory; the recorded sequence stays
    // monotone either way.
    (void)accepted;
    out.objectives.push_back(current);
  }
  out.trajectory = std::move(u);
  return out;
}

// ---------------------------------------------------------------------------
// Dense derivative-free oracle.
// ---------------------------------------------------------------------------

namespace {

struct NelderMead {
  std::function<double(const std::vector<double>&)> f;
  long evals = 0;

  double run(std::vector<double>& x, double h, double ftol, long max_evals) {
    const size_t n = x.size();
    std::vector<std::vector<double>> pts(n + 1, x);
    std::vector<double> fx(n + 1);
    for (size_t i = 0; i < n; ++i) pts[i + 1][i] += h;
    for (size_t i = 0; i <= n; ++i) {
      fx[i] = f(pts[i]);
      ++evals;
    }
    std::vector<size_t> order(n + 1);
    while (evals < max_evals) {
      for (size_t i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](size_t a, size_t b) { return fx[a] < fx[b]; });
      const size_t best = order[0], worst = order[n], second = order[n - 1];
      if (fx[worst] - fx[best] <= ftol * (1.0 + std::abs(fx[best]))) break;

      std::vector<double> centroid(n, 0.0);
      for (size_t i = 0; i <= n; ++i) {
        if (i == worst) continue;
        for (size_t c = 0; c < n; ++c) centroid[c] += pts[i][c];
      }
      for (size_t c = 0; c < n; ++c) centroid[c] /= static_cast<double>(n);

      auto combine = [&](double coef) {
        std::vector<double> p(n);
        for (size_t c = 0; c < n; ++c) {
          p[c] = centroid[c] + coef * (pts[worst][c] - centroid[c]);
        }
        return p;
      };
      std::vector<double> refl = combine(-1.0);
      const double frefl = f(refl);
      ++evals;
      if (frefl < fx[best]) {
        std::vector<double> expa = combine(-2.0);
        const double fexpa = f(expa);
        ++evals;
        if (fexpa < frefl) {
          pts[worst] = std::move(expa);
          fx[worst] = fexpa;
        } else {
          pts[worst] = std::move(refl);
          fx[worst] = frefl;
        }
      } else if (frefl < fx[second]) {
        pts[worst] = std::move(refl);
        fx[worst] = frefl;
      } else {
        const bool outside = frefl < fx[worst];
        std::vector<double> contr = combine(outside ? -0.5 : 0.5);
        const double fcontr = f(contr);
        ++evals;
        if (fcontr < std::min(frefl, fx[worst])) {
          pts[worst] = std::move(contr);
          fx[worst] = fcontr;
        } else {
          for (size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (size_t c = 0; c < n; ++c) {
              pts[i][c] = pts[best][c] + 0.5 * (pts[i][c] - pts[best][c]);
            }
            fx[i] = f(pts[i]);
            ++evals;
          }
        }
      }
    }
    size_t best = 0;
    for (size_t i = 1; i <= n; ++i) {
      if (fx[i] < fx[best]) best = i;
    }
    x = pts[best];
    double spread = 0.0;
    for (size_t i = 0; i <= n; ++i) {
      spread = std::max(spread, fx[i] - fx[best]);
    }
    last_spread = spread;
    return fx[best];
  }

  double last_spread = 0.0;
};

}  // namespace

SolveResult brute_force(const WideProblem& problem, const WeightScheme& w,
                        double tol, std::uint64_t seed) {
  problem.validate();
  const long free_dim = problem.free_nodes() * problem.dim();
  if (free_dim > 12) {
    throw DimensionTooLarge("dense oracle supports at most 12 free variables");
  }
  const long i0 = problem.first_free();
  const int d = problem.dim();
  const double ftol = tol > 0.0 ? tol : 1e-12;

  Trajectory base = problem.constrained_trajectory();
  auto to_trajectory = [&](const std::vector<double>& x) {
    Trajectory v = base;
    for (long j = i0; j <= v.grid.steps; ++j) {
      double* vj = v.node(j);
      for (int c = 0; c < d; ++c) {
        vj[c] = x[static_cast<size_t>(j - i0) * d + c];
      }
    }
    return v;
  };
  auto objective = [&](const std::vector<double>& x) -> double {
    try {
      return eval_functional(problem, w, to_trajectory(x));
    } catch (const NonFiniteValue&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> x0(static_cast<size_t>(free_dim));
  for (long j = i0; j <= base.grid.steps; ++j) {
    const double* bj = base.node(j);
    for (int c = 0; c < d; ++c) {
      x0[static_cast<size_t>(j - i0) * d + c] = bj[c];
    }
  }
  double scale = 1.0;
  for (double v : problem.u0) scale = std::max(scale, std::abs(v));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  NelderMead nm;
  nm.f = objective;
  std::vector<std::pair<double, std::vector<double>>> results;
  const int starts = 20;
  for (int k = 0; k < starts; ++k) {
    std::vector<double> x = x0;
    if (k > 0) {
      for (double& v : x) v += scale * gauss(rng);
    }
    double fx = nm.run(x, 0.5 * scale, 1e-13, 6000 * free_dim);
    // Polish with shrinking restarts around the found point.
    for (double h : {1e-2 * scale, 1e-4 * scale, 1e-6 * scale}) {
      fx = nm.run(x, h, 1e-15, 4000 * free_dim);
    }
    results.emplace_back(fx, std::move(x));
  }

  size_t best = 0;
  for (size_t k = 1; k < results.size(); ++k) {
    const double diff = results[k].first - results[best].first;
    if (diff < -1e-12) {
      best = k;
    } else if (std::abs(diff) <= 1e-12 &&
               results[k].second < results[best].second) {
      best = k;
    }
  }

  SolveResult out;
  out.trajectory = to_trajectory(results[best].second);
  out.report.objective = results[best].first;
  out.report.iterations = nm.evals;
  out.report.residual = nm.last_spread;
  out.report.solver = SolverPath::BruteForce;
  out.report.converged = true;
  out.report.weight_prefactor_dropped = w.dropped_prefactor();
  // Re-check the stopping spread against the requested tolerance.
  if (ftol > 0.0 && nm.last_spread > ftol * (1.0 + std::abs(out.report.objective))) {
    out.report.converged = nm.last_spread <=
                           1e-9 * (1.0 + std::abs(out.report.objective));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Router.
// ---------------------------------------------------------------------------

namespace {

// C^1 smoothing of the square-root selection energy: gradient
// -2*sqrt(max(u,0) + eta), linear continuation for u < 0. Curvature is
// bounded by 1/sqrt(eta) and the flat trajectory is no longer critical,
// which is exactly what the continuation in solve_auto needs; eta = 0
// recovers the original energy.
// One exact stationarity step on an affine residual: for rho = 0 the
// classical banded solution is the start (it differs from the minimizer
// only through its final-row closure), for rho > 0 the direct solve
// already is that step.
SolveResult direct_quadratic_minimize(const WideProblem& problem,
                                      const WeightScheme& w) {
  if (problem.rho > 0.0) return solve_quadratic(problem, w);
  SolveResult base = solve_quadratic(problem, w);
  Trajectory u = std::move(base.trajectory);
  std::vector<double> r = scaled_residual(problem, w, u);
  for (double& v : r) v = -v;
  BandedMatrix J = scaled_jacobian(problem, w, u);
  J.solve_in_place(r);
  add_scaled_free(u, r, 1.0, problem.first_free(), problem.dim());
  const std::vector<double> post = scaled_residual(problem, w, u);

  SolveResult out;
  out.trajectory = std::move(u);
  out.report.objective = eval_functional(problem, w, out.trajectory);
  out.report.iterations = base.report.iterations + 1;
  out.report.residual = inf_norm(post);
  out.report.solver = SolverPath::BandedDirect;
  out.report.converged = true;
  out.report.weight_prefactor_dropped = w.dropped_prefactor();
  return out;
}

EnergyModel smoothed_selection_energy(const WideProblem& problem, double eta) {
  EnergyModel e;
  e.dim = problem.energy.dim;
  e.name = "sqrt_selection_smoothed";
  e.lambda_convexity = -1.0 / std::sqrt(eta);
  e.forcing = problem.energy.forcing;
  e.value = [eta](std::span<const double> u) {
    double total = 0.0;
    for (double x : u) {
      if (x >= 0.0) {
        total += -(4.0 / 3.0) * (std::pow(x + eta, 1.5) - std::pow(eta, 1.5));
      } else {
        total += -2.0 * std::sqrt(eta) * x;
      }
    }
    return total;
  };
  e.gradient = [eta](std::span<const double> u, std::span<double> g) {
    for (size_t c = 0; c < u.size(); ++c) {
      g[c] = u[c] >= 0.0 ? -2.0 * std::sqrt(u[c] + eta)
                         : -2.0 * std::sqrt(eta);
    }
  };
  e.hessian = [eta](std::span<const double> u, std::span<double> h) {
    const size_t d = u.size();
    std::fill(h.begin(), h.end(), 0.0);
    for (size_t c = 0; c < d; ++c) {
      h[c * d + c] = u[c] >= 0.0 ? -1.0 / std::sqrt(u[c] + eta) : 0.0;
    }
  };
  return e;
}

}  // namespace

SolveResult solve_auto(const WideProblem& problem, const WeightScheme& w) {
  problem.validate();
  const bool nonsmooth =
      problem.dissipation.kind == DissipationKind::OneHomogeneous ||
      (problem.dissipation.kind == DissipationKind::PowerLaw &&
       problem.dissipation.p < 2.0);
  if (nonsmooth) {
    return solve_prox(problem, w, problem.constrained_trajectory(), -1.0);
  }
  // Exact quadratic problems have an affine stationarity system: direct
  // linear algebra reaches the solve's precision floor in a fixed number of
  // passes, whereas tolerance-driven Newton can sit above that floor
  // forever when the scaled system is ill-conditioned (large kappa with
  // inertia). The classical banded solution closes with the natural final
  // condition rather than full stationarity, so one exact stationarity
  // step from it lands on the true minimizer.
  if (problem.dissipation.kind == DissipationKind::Quadratic &&
      problem.energy.is_quadratic() &&
      (problem.rho > 0.0 || problem.dissipation.nu > 0.0)) {
    try {
      return direct_quadratic_minimize(problem, w);
    } catch (const SingularityRisk&) {
      // Steep concave quadratics can defeat the assembled system at this
      // step size; fall through to the damped iteration.
    }
  }
  if (problem.energy.name == "sqrt_selection") {
    // Two obstacles here: the flat trajectory is a critical point, and the
    // square-root kink at u = 0 (curvature unbounded below) stalls Newton
    // steps at nodes near the origin. Both disappear under a short
    // continuation in a C^1 smoothing of the energy, warm-starting each
    // stage and finishing on the exact energy.
    Trajectory u = problem.constrained_trajectory();
    SolveResult last;
    long total_iters = 0;
    for (double eta : {1e-2, 1e-4, 1e-6, 1e-8, 0.0}) {
      WideProblem stage = problem;
      if (eta > 0.0) stage.energy = smoothed_selection_energy(problem, eta);
      last = solve_newton(stage, w, u, -1.0);
      u = last.trajectory;
      total_iters += last.report.iterations;
    }
    last.report.iterations = total_iters;
    return last;
  }
  return solve_newton(problem, w, problem.constrained_trajectory(), -1.0);
}

}  // namespace wide
