#include "wide/oracles.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "wide/errors.hpp"

namespace wide {

std::vector<double> ReferenceSolution::at(double t) const {
  const int d = trajectory.dim;
  std::vector<double> out(static_cast<size_t>(d), 0.0);
  if (analytic()) {
    evaluate(t, out);
    return out;
  }
  const TimeGrid& g = trajectory.grid;
  double pos = t / g.tau;
  pos = std::clamp(pos, 0.0, static_cast<double>(g.steps));
  const long i = std::min(static_cast<long>(pos), g.steps - 1);
  const double frac = pos - static_cast<double>(i);
  const double* a = trajectory.node(i);
  const double* b = trajectory.node(i + 1);
  for (int c = 0; c < d; ++c) out[c] = (1.0 - frac) * a[c] + frac * b[c];
  return out;
}

namespace {

// Dense d x d solve (per-step Newton systems); partial pivoting via LAPACK.
void dense_solve(std::vector<double>& a, std::vector<double>& b, int d) {
  std::vector<lapack_int> ipiv(static_cast<size_t>(d));
  const lapack_int info =
      LAPACKE_dgesv(LAPACK_ROW_MAJOR, d, 1, a.data(), d, ipiv.data(), b.data(), 1);
  if (info != 0) {
    throw SingularSystem("dense step system is singular");
  }
}

void energy_hessian_dense(const EnergyModel& E, const double* u,
                          std::vector<double>& H) {
  const int d = E.dim;
  H.assign(static_cast<size_t>(d) * d, 0.0);
  if (E.has_hessian()) {
    E.hessian(std::span<const double>(u, d), std::span<double>(H));
    return;
  }
  if (E.is_quadratic()) {
    H = E.quadratic_matrix;
    return;
  }
  std::vector<double> up(u, u + d), gp(d), gm(d);
  for (int c = 0; c < d; ++c) {
    const double h = 1e-6 * (1.0 + std::abs(u[c]));
    up[c] = u[c] + h;
    E.gradient(up, gp);
    up[c] = u[c] - h;
    E.gradient(up, gm);
    up[c] = u[c];
    for (int r = 0; r < d; ++r) {
      H[static_cast<size_t>(r) * d + c] = (gp[r] - gm[r]) / (2.0 * h);
    }
  }
}

double inf_norm_span(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Linear interpolation of the problem's forcing at an arbitrary time.
void forcing_at_time(const WideProblem& problem, double t,
                     std::vector<double>& out) {
  const int d = problem.dim();
  out.assign(static_cast<size_t>(d), 0.0);
  if (!problem.energy.has_forcing()) return;
  const TimeGrid& g = problem.grid;
  double pos = std::clamp(t / g.tau, 0.0, static_cast<double>(g.steps));
  const long i = std::min(static_cast<long>(pos), g.steps - 1);
  const double frac = pos - static_cast<double>(i);
  const double* a = problem.energy.forcing_at(i);
  const double* b = problem.energy.forcing_at(i + 1);
  for (int c = 0; c < d; ++c) out[c] = (1.0 - frac) * a[c] + frac * b[c];
}

}  // namespace

ReferenceSolution implicit_euler(const WideProblem& problem) {
  problem.validate();
  if (problem.rho != 0.0) {
    throw InvalidParams("backward Euler reference requires a first-order problem");
  }
  if (problem.dissipation.kind != DissipationKind::Quadratic ||
      !(problem.dissipation.nu > 0.0)) {
    throw InvalidParams("backward Euler reference requires quadratic dissipation");
  }
  const int d = problem.dim();
  const double tau = problem.grid.tau;
  const double nu = problem.dissipation.nu;
  const long N = problem.grid.steps;

  Trajectory traj = Trajectory::zeros(problem.grid, d);
  for (int c = 0; c < d; ++c) traj.node(0)[c] = problem.u0[c];

  std::vector<double> u(problem.u0), g(d), H, step(d), egrad(d);
  for (long i = 1; i <= N; ++i) {
    const double* v = traj.node(i - 1);
    const double* f = problem.energy.forcing_at(i);
    // Newton on nu*(u - v)/tau + grad E(u) - f_i = 0 from the previous node.
    bool done = false;
    for (int it = 0; it < 100; ++it) {
      problem.energy.gradient(u, egrad);
      double rnorm = 0.0;
      for (int c = 0; c < d; ++c) {
        g[c] = nu * (u[c] - v[c]) / tau + egrad[c] - (f ? f[c] : 0.0);
        rnorm = std::max(rnorm, std::abs(g[c]));
      }
      if (rnorm <= 1e-12 * (1.0 + nu / tau)) {
        done = true;
        break;
      }
      energy_hessian_dense(problem.energy, u.data(), H);
      for (int c = 0; c < d; ++c) H[static_cast<size_t>(c) * d + c] += nu / tau;
      step = g;
      try {
        dense_solve(H, step, d);
      } catch (const SingularSystem&) {
        throw StepNewtonFailure("singular step system in backward Euler");
      }
      for (int c = 0; c < d; ++c) u[c] -= step[c];
    }
    if (!done) {
      // Final residual check after the iteration cap.
      problem.energy.gradient(u, egrad);
      double rnorm = 0.0;
      for (int c = 0; c < d; ++c) {
        rnorm = std::max(rnorm, std::abs(nu * (u[c] - v[c]) / tau + egrad[c] -
                                         (f ? f[c] : 0.0)));
      }
      if (rnorm > 1e-8 * (1.0 + nu / tau)) {
        throw StepNewtonFailure("backward Euler step did not converge");
      }
    }
    for (int c = 0; c < d; ++c) traj.node(i)[c] = u[c];
  }

  ReferenceSolution ref;
  ref.provenance = ReferenceKind::ImplicitEuler;
  ref.trajectory = std::move(traj);
  ref.name = "implicit_euler";
  return ref;
}

namespace {

// Scalar root of smooth_deriv(u) = target on the given side of v
// (side > 0 searches u > v): bracket by doubling, then bisection with
// Newton-style midpoint refinement.
double scalar_branch_root(const std::function<double(double)>& deriv,
                          double v, double target, int side) {
  double lo = v, hi = v;
  double width = 1e-8;
  const double sgn = side > 0 ? 1.0 : -1.0;
  double glo = deriv(v) - target;
  bool bracketed = false;
  for (int k = 0; k < 200; ++k) {
    const double cand = v + sgn * width;
    const double gc = deriv(cand) - target;
    if ((glo <= 0.0 && gc >= 0.0) || (glo >= 0.0 && gc <= 0.0)) {
      if (side > 0) {
        hi = cand;
      } else {
        lo = cand;
      }
      bracketed = true;
      break;
    }
    if (side > 0) {
      lo = cand;
    } else {
      hi = cand;
    }
    glo = gc;
    width *= 2.0;
  }
  if (!bracketed) {
    throw StepMinimizationFailure("threshold step root not bracketed");
  }
  if (side > 0 && lo == v) lo = v;
  if (side < 0 && hi == v) hi = v;
  double flo = deriv(lo) - target;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = deriv(mid) - target;
    if (fm == 0.0 || hi - lo <= 1e-15 * (1.0 + std::abs(mid))) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ReferenceSolution incremental_minimization(const WideProblem& problem,
                                           double tau) {
  problem.validate();
  if (!(tau > 0.0)) throw InvalidParams("step must be positive");
  const long steps = std::lround(problem.grid.horizon / tau);
  if (steps < 2) throw TooFewSteps("incremental grid needs at least 2 steps");
  const TimeGrid grid = TimeGrid::make(problem.grid.horizon, steps);
  const int d = problem.dim();
  const double h = grid.tau;

  Trajectory traj = Trajectory::zeros(grid, d);
  for (int c = 0; c < d; ++c) traj.node(0)[c] = problem.u0[c];
  if (problem.rho > 0.0) {
    for (int c = 0; c < d; ++c) {
      traj.node(1)[c] = problem.u0[c] + h * (*problem.u1)[c];
    }
  }
  const long first = problem.rho > 0.0 ? 2 : 1;

  std::vector<double> f(d), u(d), egrad(d), H, step(d), g(d);
  const DissipationModel& D = problem.dissipation;
  for (long n = first; n <= steps; ++n) {
    forcing_at_time(problem, grid.node(n), f);
    const double* v = traj.node(n - 1);
    const double* w2 = n >= 2 ? traj.node(n - 2) : nullptr;
    for (int c = 0; c < d; ++c) u[c] = v[c];

    auto smooth_grad = [&](const double* x, double* out) {
      problem.energy.gradient(std::span<const double>(x, d), egrad);
      for (int c = 0; c < d; ++c) {
        out[c] = egrad[c] - f[c];
        if (problem.rho > 0.0) {
          out[c] += problem.rho * (x[c] - 2.0 * v[c] + w2[c]) / (h * h);
        }
      }
    };

    if (D.kind == DissipationKind::OneHomogeneous && d == 1) {
      // Threshold dynamics in closed form: stick unless the smooth load
      // exceeds alpha, otherwise land on the matching branch root.
      auto sderiv = [&](double x) {
        double out;
        smooth_grad(&x, &out);
        return out;
      };
      const double at_v = sderiv(v[0]);
      if (std::abs(at_v) <= D.alpha) {
        u[0] = v[0];
      } else if (at_v < -D.alpha) {
        u[0] = scalar_branch_root(sderiv, v[0], -D.alpha, +1);
      } else {
        u[0] = scalar_branch_root(sderiv, v[0], D.alpha, -1);
      }
    } else if (D.kind == DissipationKind::OneHomogeneous) {
      // Proximal-gradient fixed point on the per-step problem.
      double s = 1.0;
      bool settled = false;
      std::vector<double> sg(d), y(d), unew(d);
      for (int it = 0; it < 5000 && !settled; ++it) {
        smooth_grad(u.data(), sg.data());
        for (int c = 0; c < d; ++c) y[c] = u[c] - s * (sg[c]);
        for (int c = 0; c < d; ++c) {
          const double z = y[c] - v[c];
          const double th = s * D.alpha;
          unew[c] = v[c] + (z > th ? z - th : (z < -th ? z + th : 0.0));
        }
        double move = 0.0;
        for (int c = 0; c < d; ++c) move = std::max(move, std::abs(unew[c] - u[c]));
        u = unew;
        settled = move <= 1e-13 * (1.0 + inf_norm_span(u)) * s;
      }
      if (!settled) {
        throw StepMinimizationFailure("threshold step fixed point not reached");
      }
    } else {
      // Smooth dissipation: damped Newton on the step stationarity
      // rho*delta2 + D'(rate) + grad E(u) = f.
      bool done = false;
      std::vector<double> rate(d);
      for (int it = 0; it < 200; ++it) {
        for (int c = 0; c < d; ++c) rate[c] = (u[c] - v[c]) / h;
        std::vector<double> dp(d);
        if (D.kind == DissipationKind::Quadratic) {
          for (int c = 0; c < d; ++c) dp[c] = D.nu * rate[c];
        } else {
          for (int c = 0; c < d; ++c) {
            dp[c] = rate[c] == 0.0
                        ? 0.0
                        : D.coeff * std::pow(std::abs(rate[c]), D.p - 1.0) *
                              (rate[c] > 0.0 ? 1.0 : -1.0);
          }
        }
        smooth_grad(u.data(), g.data());
        double rnorm = 0.0;
        for (int c = 0; c < d; ++c) {
          g[c] += dp[c];
          rnorm = std::max(rnorm, std::abs(g[c]));
        }
        if (rnorm <= 1e-11 * (1.0 + 1.0 / h)) {
          done = true;
          break;
        }
        energy_hessian_dense(problem.energy, u.data(), H);
        for (int c = 0; c < d; ++c) {
          double curv = D.curvature(rate[c]) / h;
          if (problem.rho > 0.0) curv += problem.rho / (h * h);
          H[static_cast<size_t>(c) * d + c] += curv;
        }
        step = g;
        try {
          dense_solve(H, step, d);
        } catch (const SingularSystem&) {
          throw StepMinimizationFailure("singular incremental step system");
        }
        // Halve on overshoot of the step residual.
        double t = 1.0;
        double best = rnorm;
        std::vector<double> trial(d), tg(d), trate(d), tdp(d);
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
          for (int c = 0; c < d; ++c) trial[c] = u[c] - t * step[c];
          for (int c = 0; c < d; ++c) trate[c] = (trial[c] - v[c]) / h;
          if (D.kind == DissipationKind::Quadratic) {
            for (int c = 0; c < d; ++c) tdp[c] = D.nu * trate[c];
          } else {
            for (int c = 0; c < d; ++c) {
              tdp[c] = trate[c] == 0.0
                           ? 0.0
                           : D.coeff * std::pow(std::abs(trate[c]), D.p - 1.0) *
                                 (trate[c] > 0.0 ? 1.0 : -1.0);
            }
          }
          smooth_grad(trial.data(), tg.data());
          double tnorm = 0.0;
          for (int c = 0; c < d; ++c) {
            tnorm = std::max(tnorm, std::abs(tg[c] + tdp[c]));
          }
          if (tnorm < best) {
            u = trial;
            moved = true;
            break;
          }
        }
        if (!moved) {
          throw StepMinimizationFailure("incremental step stalled");
        }
      }
      if (!done) {
        throw StepMinimizationFailure("incremental step did not converge");
      }
    }
    for (int c = 0; c < d; ++c) traj.node(n)[c] = u[c];
  }

  ReferenceSolution ref;
  ref.provenance = ReferenceKind::Incremental;
  ref.trajectory = std::move(traj);
  ref.name = "incremental";
  return ref;
}

ReferenceSolution leapfrog_wave(const WideProblem& problem) {
  problem.validate();
  if (!(problem.rho > 0.0)) {
    throw InvalidParams("leapfrog requires a second-order problem");
  }
  if (problem.dissipation.kind != DissipationKind::Quadratic) {
    throw InvalidParams("leapfrog requires quadratic (or zero) damping");
  }
  const double tau = problem.grid.tau;
  if (problem.spatial_h > 0.0 && tau > 0.5 * problem.spatial_h) {
    throw StabilityViolation("step exceeds half the mesh spacing");
  }
  const int d = problem.dim();
  const double rho = problem.rho;
  const double nu = problem.dissipation.nu;
  const long N = problem.grid.steps;

  Trajectory traj = Trajectory::zeros(problem.grid, d);
  std::vector<double> egrad(d);
  for (int c = 0; c < d; ++c) traj.node(0)[c] = problem.u0[c];
  {
    // Second-order start: u_1 = u0 + tau u1 + (tau^2/2) a0.
    problem.energy.gradient(problem.u0, egrad);
    const double* f = problem.energy.forcing_at(0);
    for (int c = 0; c < d; ++c) {
      const double a0 = ((f ? f[c] : 0.0) - nu * (*problem.u1)[c] - egrad[c]) / rho;
      traj.node(1)[c] = problem.u0[c] + tau * (*problem.u1)[c] +
                        0.5 * tau * tau * a0;
    }
  }
  const double lead = rho / (tau * tau) + nu / (2.0 * tau);
  const double lag = rho / (tau * tau) - nu / (2.0 * tau);
  for (long n = 1; n < N; ++n) {
    const double* un = traj.node(n);
    const double* um = traj.node(n - 1);
    problem.energy.gradient(std::span<const double>(un, d), egrad);
    const double* f = problem.energy.forcing_at(n);
    for (int c = 0; c < d; ++c) {
      const double rhs = (f ? f[c] : 0.0) - egrad[c] +
                         2.0 * rho / (tau * tau) * un[c] - lag * um[c];
      traj.node(n + 1)[c] = rhs / lead;
    }
  }

  ReferenceSolution ref;
  ref.provenance = ReferenceKind::Leapfrog;
  ref.trajectory = std::move(traj);
  ref.name = "leapfrog";
  return ref;
}

ReferenceSolution solve_quasistatic(const EnergyModel& energy,
                                    const TimeGrid& grid) {
  const int d = energy.dim;
  Trajectory traj = Trajectory::zeros(grid, d);
  std::vector<double> u(static_cast<size_t>(d), 0.0), g(d), H, step(d);
  for (long i = 0; i <= grid.steps; ++i) {
    const double* f = energy.forcing_at(i);
    bool done = false;
    if (d == 1) {
      // Scalar: safeguarded bisection on grad E(u) = f_i (continuation
      // start), exact for monotone gradients.
      auto gd = [&](double x) {
        double out;
        energy.gradient(std::span<const double>(&x, 1), std::span<double>(&out, 1));
        return out - (f ? f[0] : 0.0);
      };
      double x = u[0];
      double gx = gd(x);
      if (std::abs(gx) <= 1e-12) {
        done = true;
      } else {
        const int side = gx < 0.0 ? +1 : -1;
        try {
          x = scalar_branch_root(gd, x, 0.0, side);
          done = std::abs(gd(x)) <= 1e-9;
          u[0] = x;
        } catch (const StepMinimizationFailure&) {
          done = false;
        }
      }
    } else {
      for (int it = 0; it < 200 && !done; ++it) {
        energy.gradient(u, g);
        double rnorm = 0.0;
        for (int c = 0; c < d; ++c) {
          g[c] -= f ? f[c] : 0.0;
          rnorm = std::max(rnorm, std::abs(g[c]));
        }
        if (rnorm <= 1e-10) {
          done = true;
          break;
        }
        energy_hessian_dense(energy, u.data(), H);
        for (int c = 0; c < d; ++c) {
          H[static_cast<size_t>(c) * d + c] += 1e-12;
        }
        step = g;
        try {
          dense_solve(H, step, d);
        } catch (const SingularSystem&) {
          throw NodeMinimizationFailure("singular node system");
        }
        for (int c = 0; c < d; ++c) u[c] -= step[c];
      }
    }
    if (!done) {
      throw NodeMinimizationFailure("node stationarity not reached");
    }
    for (int c = 0; c < d; ++c) traj.node(i)[c] = u[c];
  }

  ReferenceSolution ref;
  ref.provenance = ReferenceKind::Analytic;
  ref.trajectory = std::move(traj);
  ref.name = "quasistatic";
  return ref;
}

namespace {

struct BvpForm {
  double rminus = 0.0;
  double rplus = 0.0;
  double A = 0.0;
  double Btilde = 0.0;
  double horizon = 0.0;
};

BvpForm bvp_coefficients(const AnalyticSpec& spec) {
  if (!(spec.epsilon > 0.0)) {
    throw NonPositiveEpsilon("boundary-value form needs a positive epsilon");
  }
  if (!(spec.nu > 0.0)) throw InvalidParams("viscosity must be positive");
  const double disc = 1.0 + 4.0 * spec.epsilon * spec.lambda / spec.nu;
  if (!(disc > 0.0)) {
    throw InvalidParams("characteristic discriminant must stay positive");
  }
  BvpForm f;
  f.horizon = spec.horizon;
  const double root = std::sqrt(disc);
  f.rminus = (1.0 - root) / (2.0 * spec.epsilon);
  f.rplus = (1.0 + root) / (2.0 * spec.epsilon);
  const double u0 = spec.u0.empty() ? 1.0 : spec.u0[0];
  const double ratio = f.rminus / f.rplus;
  const double denom =
      1.0 - ratio * std::exp((f.rminus - f.rplus) * spec.horizon);
  f.A = u0 / denom;
  f.Btilde = -ratio * f.A * std::exp(f.rminus * spec.horizon);
  return f;
}

}  // namespace

ReferenceSolution analytic_catalogue(const AnalyticSpec& spec) {
  ReferenceSolution ref;
  ref.provenance = ReferenceKind::Analytic;
  ref.name = spec.name;

  if (spec.name == "exp_decay") {
    const std::vector<double> u0 = spec.u0;
    const double lambda = spec.lambda;
    ref.trajectory.dim = static_cast<int>(u0.size());
    ref.evaluate = [u0, lambda](double t, std::span<double> out) {
      for (size_t c = 0; c < u0.size(); ++c) out[c] = u0[c] * std::exp(-lambda * t);
    };
    return ref;
  }
  if (spec.name == "harmonic") {
    if (!(spec.lambda > 0.0) || !(spec.rho > 0.0)) {
      throw InvalidParams("harmonic entry needs positive stiffness and inertia");
    }
    const std::vector<double> u0 = spec.u0;
    std::vector<double> u1 = spec.u1;
    u1.resize(u0.size(), 0.0);
    const double omega = std::sqrt(spec.lambda / spec.rho);
    ref.trajectory.dim = static_cast<int>(u0.size());
    ref.evaluate = [u0, u1, omega](double t, std::span<double> out) {
      for (size_t c = 0; c < u0.size(); ++c) {
        out[c] = u0[c] * std::cos(omega * t) + u1[c] / omega * std::sin(omega * t);
      }
    };
    return ref;
  }
  if (spec.name == "heat_mode" || spec.name == "wave_mode") {
    const int M = spec.mesh_points;
    if (M < 1) throw GridTooShort("mode entries need a spatial mesh");
    if (spec.mode_k < 1 || spec.mode_k > M) {
      throw ModeOutOfRange("mode index must lie within the mesh resolution");
    }
    const double L = spec.mesh_length;
    const double h = L / (M + 1);
    const int k = spec.mode_k;
    const double mu =
        2.0 / (h * h) * (1.0 - std::cos(k * M_PI * h / L));
    const bool wave = spec.name == "wave_mode";
    ref.trajectory.dim = M;
    ref.evaluate = [M, L, h, k, mu, wave](double t, std::span<double> out) {
      const double amp = wave ? std::cos(std::sqrt(mu) * t) : std::exp(-mu * t);
      for (int j = 0; j < M; ++j) {
        const double x = h * (j + 1);
        out[j] = amp * std::sin(k * M_PI * x / L);
      }
    };
    return ref;
  }
  if (spec.name == "selection_t2") {
    ref.trajectory.dim = 1;
    ref.evaluate = [](double t, std::span<double> out) { out[0] = t * t; };
    return ref;
  }
  if (spec.name == "play") {
    const double alpha = spec.alpha;
    ref.trajectory.dim = 1;
    ref.evaluate = [alpha](double t, std::span<double> out) {
      out[0] = std::max(0.0, t - alpha);
    };
    return ref;
  }
  if (spec.name == "wide_linear_bvp") {
    const BvpForm f = bvp_coefficients(spec);
    ref.trajectory.dim = 1;
    ref.evaluate = [f](double t, std::span<double> out) {
      out[0] = f.A * std::exp(f.rminus * t) +
               f.Btilde * std::exp(f.rplus * (t - f.horizon));
    };
    return ref;
  }
  throw UnknownEntry("no catalogue entry named " + spec.name);
}

double wide_linear_bvp_derivative(const AnalyticSpec& spec, double t) {
  const BvpForm f = bvp_coefficients(spec);
  return f.A * f.rminus * std::exp(f.rminus * t) +
         f.Btilde * f.rplus * std::exp(f.rplus * (t - f.horizon));
}

}  // namespace wide
