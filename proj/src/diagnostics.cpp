#include "wide/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "wide/errors.hpp"
#include "wide/functional.hpp"
#include "wide/minimize.hpp"

namespace wide {

bool DiagnosticReport::all_pass() const {
  for (const DiagnosticRow& row : rows) {
    if (!row.pass) return false;
  }
  return true;
}

namespace {

double traj_sup(const Trajectory& u) {
  double m = 0.0;
  const size_t n = u.values.size();
  for (size_t i = 0; i < n; ++i) m = std::max(m, std::abs(u.values[i]));
  return m;
}

double energy_at(const WideProblem& problem, const double* x) {
  return problem.energy.value(std::span<const double>(x, problem.dim()));
}

// D'(w) componentwise, with the one-homogeneous subgradient selection
// alpha*sign(w) (0 at w = 0) so final-condition residuals stay defined.
double rate_force(const DissipationModel& D, double w) {
  switch (D.kind) {
    case DissipationKind::Quadratic:
      return D.nu * w;
    case DissipationKind::PowerLaw:
      return w == 0.0 ? 0.0
                      : D.coeff * std::pow(std::abs(w), D.p - 1.0) *
                            (w > 0.0 ? 1.0 : -1.0);
    case DissipationKind::OneHomogeneous:
      return w == 0.0 ? 0.0 : (w > 0.0 ? D.alpha : -D.alpha);
  }
  return 0.0;
}

}  // namespace

std::vector<double> el_residual(const Trajectory& u, const WideProblem& problem,
                                const WeightScheme& w) {
  problem.validate();
  const long N = problem.grid.steps;
  const bool inertial = problem.rho > 0.0;
  const long lo = inertial ? 2 : 1;
  const long hi = inertial ? N - 2 : N - 1;
  if (hi < lo) {
    throw GridTooShort("no interior node fits the full difference stencil");
  }
  const std::vector<double> rows = scaled_residual(problem, w, u);
  const long first = problem.first_free();
  const int d = problem.dim();
  std::vector<double> norms;
  norms.reserve(static_cast<size_t>(hi - lo + 1));
  for (long j = lo; j <= hi; ++j) {
    const double* row = rows.data() + static_cast<size_t>(j - first) * d;
    double m = 0.0;
    for (int c = 0; c < d; ++c) m = std::max(m, std::abs(row[c]));
    norms.push_back(m);
  }
  return norms;
}

FinalConditions final_conditions(const Trajectory& u,
                                 const WideProblem& problem,
                                 const WeightScheme& w) {
  problem.validate();
  const long N = problem.grid.steps;
  const double tau = problem.grid.tau;
  const int d = problem.dim();
  FinalConditions out;
  const double scale = 1.0 + traj_sup(u);
  if (problem.rho == 0.0) {
    double r = 0.0;
    for (int c = 0; c < d; ++c) {
      r = std::max(r, std::abs(u.node(N)[c] - u.node(N - 1)[c]));
    }
    out.residuals = {r};
    out.threshold = 1e-12 * scale;
  } else {
    if (N < 3) throw GridTooShort("final conditions need at least 3 steps");
    const double eh = w.eps_hat;
    const double rho = problem.rho;
    double r1 = 0.0, r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double uN = u.node(N)[c], u1 = u.node(N - 1)[c],
                   u2 = u.node(N - 2)[c], u3 = u.node(N - 3)[c];
      const double d1 = (uN - u1) / tau;
      const double d2 = (uN - 2.0 * u1 + u2) / (tau * tau);
      const double d3 = (uN - 3.0 * u1 + 3.0 * u2 - u3) / (tau * tau * tau);
      r1 = std::max(r1, std::abs(eh * eh * rho * d2));
      r2 = std::max(r2, std::abs(-eh * eh * rho * d3 +
                                 eh * rate_force(problem.dissipation, d1)));
    }
    out.residuals = {r1, r2};
    out.threshold = 10.0 * tau * scale;
  }
  out.pass = true;
  for (double r : out.residuals) {
    if (!(r <= out.threshold)) out.pass = false;
  }
  return out;
}

InnerVariation inner_variation_identity(const Trajectory& u,
                                        const WideProblem& problem,
                                        const WeightScheme& w) {
  problem.validate();
  if (problem.rho != 0.0 ||
      problem.dissipation.kind != DissipationKind::Quadratic) {
    throw WrongRegime("inner-variation identity needs rho=0 and quadratic dissipation");
  }
  if (problem.energy.has_forcing()) {
    throw WrongRegime("inner-variation identity is for autonomous energies");
  }
  const long N = problem.grid.steps;
  const double tau = problem.grid.tau;
  const double nu = problem.dissipation.nu;
  const double eps = w.epsilon;
  const int d = problem.dim();

  auto rate_sq = [&](long i) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double r = (u.node(i)[c] - u.node(i - 1)[c]) / tau;
      s += r * r;
    }
    return s;
  };

  double dissip = 0.0;
  for (long i = 1; i <= N; ++i) dissip += tau * rate_sq(i);
  InnerVariation out;
  out.global_defect = std::abs(0.5 * eps * nu * rate_sq(1) + nu * dissip +
                               energy_at(problem, u.node(N)) -
                               energy_at(problem, u.node(0)));

  double sup = 0.0;
  double prev_s = -0.5 * eps * nu * rate_sq(1) + energy_at(problem, u.node(1));
  for (long i = 2; i <= N; ++i) {
    const double si =
        -0.5 * eps * nu * rate_sq(i) + energy_at(problem, u.node(i));
    sup = std::max(sup, std::abs(nu * rate_sq(i) + (si - prev_s) / tau));
    prev_s = si;
  }
  out.local_sup_defect = sup;
  return out;
}

MonitorTable estimate_monitors(const std::vector<Trajectory>& family,
                               const std::vector<double>& epsilons,
                               const WideProblem& problem) {
  if (family.size() != epsilons.size() || family.size() < 3) {
    throw InsufficientSweep("monitors need >= 3 matched (trajectory, epsilon) pairs");
  }
  if (problem.dissipation.kind != DissipationKind::Quadratic) {
    throw WrongRegime("monitors are defined for quadratic dissipation");
  }
  const double nu = problem.dissipation.nu;
  const double rho = problem.rho;
  const long N = problem.grid.steps;
  const double tau = problem.grid.tau;
  const double T = problem.grid.horizon;
  const int d = problem.dim();

  MonitorTable table;
  table.rows.reserve(family.size());
  for (size_t k = 0; k < family.size(); ++k) {
    const Trajectory& u = family[k];
    const double eps = epsilons[k];
    if (u.grid.steps != N || u.dim != d) {
      throw ShapeMismatch("family trajectory does not match the problem grid");
    }

    std::vector<double> rate_sq(static_cast<size_t>(N) + 1, 0.0);
    std::vector<double> acc_sq(static_cast<size_t>(N) + 1, 0.0);
    std::vector<double> evals(static_cast<size_t>(N) + 1, 0.0);
    std::vector<double> gsq(static_cast<size_t>(N) + 1, 0.0);
    std::vector<double> grad(static_cast<size_t>(d));
    for (long i = 0; i <= N; ++i) {
      evals[static_cast<size_t>(i)] = energy_at(problem, u.node(i));
      problem.energy.gradient(std::span<const double>(u.node(i), d), grad);
      double gs = 0.0;
      for (int c = 0; c < d; ++c) gs += grad[c] * grad[c];
      gsq[static_cast<size_t>(i)] = gs;
      if (i >= 1) {
        double rs = 0.0;
        for (int c = 0; c < d; ++c) {
          const double r = (u.node(i)[c] - u.node(i - 1)[c]) / tau;
          rs += r * r;
        }
        rate_sq[static_cast<size_t>(i)] = rs;
      }
      if (i >= 2) {
        double as = 0.0;
        for (int c = 0; c < d; ++c) {
          const double a = (u.node(i)[c] - 2.0 * u.node(i - 1)[c] +
                            u.node(i - 2)[c]) /
                           (tau * tau);
          as += a * a;
        }
        acc_sq[static_cast<size_t>(i)] = as;
      }
    }

    double sum_rate = 0.0, sum_acc = 0.0, sum_E = 0.0, sum_g = 0.0;
    for (long i = 1; i <= N; ++i) {
      sum_rate += tau * rate_sq[static_cast<size_t>(i)];
      sum_E += tau * evals[static_cast<size_t>(i)];
      sum_g += tau * gsq[static_cast<size_t>(i)];
    }
    for (long i = 2; i <= N; ++i) sum_acc += tau * acc_sq[static_cast<size_t>(i)];

    MonitorRow row;
    row.epsilon = eps;
    row.nested = rho * sum_acc + nu * sum_rate + sum_E;
    row.maxreg = eps * eps * nu * nu * sum_acc + 0.5 * nu * nu * sum_rate + sum_g;

    double scaling = 0.0;
    double running = 0.0;
    for (long i = 1; i <= N; ++i) {
      running += nu * tau * rate_sq[static_cast<size_t>(i)];
      scaling = std::max(scaling, rho * rate_sq[static_cast<size_t>(i)] + running);
    }
    row.scaling = scaling;

    // Windowed energy: trapezoidal cumulative integral of E(u(t)), window
    // [t, t+eps] clipped at T, linear interpolation at the window end.
    std::vector<double> cum(static_cast<size_t>(N) + 1, 0.0);
    for (long i = 1; i <= N; ++i) {
      cum[static_cast<size_t>(i)] =
          cum[static_cast<size_t>(i - 1)] +
          0.5 * tau * (evals[static_cast<size_t>(i - 1)] +
                       evals[static_cast<size_t>(i)]);
    }
    auto cum_at = [&](double t) {
      const double pos = std::clamp(t / tau, 0.0, static_cast<double>(N));
      const long i = std::min(static_cast<long>(pos), N - 1);
      const double frac = pos - static_cast<double>(i);
      return (1.0 - frac) * cum[static_cast<size_t>(i)] +
             frac * cum[static_cast<size_t>(i + 1)];
    };
    double windowed = 0.0;
    for (long i = 0; i <= N; ++i) {
      const double t = problem.grid.node(i);
      const double b = std::min(t + eps, T);
      if (b <= t) continue;
      windowed = std::max(windowed, (cum_at(b) - cum_at(t)) / eps);
    }
    row.windowed = windowed;
    table.rows.push_back(row);
  }

  table.bounded = true;
  const MonitorRow& first = table.rows.front();
  for (const MonitorRow& row : table.rows) {
    const bool ok = row.nested <= 2.0 * first.nested + 1e-12 &&
                    row.maxreg <= 2.0 * first.maxreg + 1e-12 &&
                    row.scaling <= 2.0 * first.scaling + 1e-12 &&
                    row.windowed <= 2.0 * first.windowed + 1e-12;
    if (!ok) table.bounded = false;
  }
  return table;
}

namespace {

SolveResult solve_for_value(const WideProblem& problem, const WeightScheme& w) {
  const bool banded = problem.rho == 0.0 &&
                      problem.dissipation.kind == DissipationKind::Quadratic &&
                      problem.dissipation.nu > 0.0 &&
                      problem.energy.is_quadratic();
  try {
    return banded ? solve_quadratic(problem, w) : solve_auto(problem, w);
  } catch (const SolverFailure& e) {
    throw SolveFailed(std::string("value solve failed: ") + e.what());
  }
}

}  // namespace

double value_function(const WideProblem& problem, const std::vector<double>& v,
                      double epsilon) {
  if (problem.rho != 0.0) {
    throw WrongRegime("the value functional is defined for rho = 0");
  }
  if (static_cast<int>(v.size()) != problem.dim()) {
    throw ShapeMismatch("state dimension does not match the problem");
  }
  WideProblem from_v = problem;
  from_v.u0 = v;
  from_v.validate();
  const WeightScheme w = weights_for(from_v, epsilon);
  const SolveResult solved = solve_for_value(from_v, w);
  return solved.report.objective / epsilon;
}

double dpp_defect(const WideProblem& problem, double epsilon,
                  int sample_count) {
  problem.validate();
  if (problem.rho != 0.0) {
    throw WrongRegime("the value functional is defined for rho = 0");
  }
  if (sample_count < 2) throw InvalidParams("need at least 2 sample nodes");
  const WeightScheme w = weights_for(problem, epsilon);
  const SolveResult solved = solve_for_value(problem, w);
  const Trajectory& u = solved.trajectory;
  const long N = problem.grid.steps;
  const double tau = problem.grid.tau;
  const double nu = problem.dissipation.nu;
  const int d = problem.dim();

  // Quadratic scalar energies without forcing: V(v) = V(1) v^2 exactly
  // (the minimizer scales linearly in the initial state).
  const bool quad_shortcut = d == 1 && problem.energy.is_quadratic() &&
                             !problem.energy.has_forcing();
  double c_v = 0.0;
  if (quad_shortcut) c_v = value_function(problem, {1.0}, epsilon);

  std::vector<double> dissip(static_cast<size_t>(N) + 1, 0.0);
  for (long i = 1; i <= N; ++i) {
    double rs = 0.0;
    for (int c = 0; c < d; ++c) {
      const double r = (u.node(i)[c] - u.node(i - 1)[c]) / tau;
      rs += r * r;
    }
    dissip[static_cast<size_t>(i)] =
        dissip[static_cast<size_t>(i - 1)] + 0.5 * nu * tau * rs;
  }
  const double e0 = energy_at(problem, u.node(0));

  double defect = 0.0;
  for (int s = 0; s < sample_count; ++s) {
    const long i = std::lround(static_cast<double>(s) *
                               static_cast<double>(N) /
                               static_cast<double>(sample_count - 1));
    double vi;
    if (quad_shortcut) {
      vi = c_v * u.node(i)[0] * u.node(i)[0];
    } else {
      vi = value_function(problem,
                          std::vector<double>(u.node(i), u.node(i) + d),
                          epsilon);
    }
    defect = std::max(defect, vi + dissip[static_cast<size_t>(i)] - e0);
  }
  return std::max(defect, 0.0);
}

double edp_residual(const Trajectory& u, const WideProblem& problem) {
  problem.validate();
  if (problem.rho != 0.0 ||
      problem.dissipation.kind != DissipationKind::Quadratic) {
    throw WrongRegime("null-minimization residual needs rho=0, quadratic dissipation");
  }
  const long N = problem.grid.steps;
  const double tau = problem.grid.tau;
  const int d = problem.dim();
  std::vector<double> grad(static_cast<size_t>(d));
  double sum_rate = 0.0, sum_g = 0.0;
  for (long i = 1; i <= N; ++i) {
    double rs = 0.0;
    for (int c = 0; c < d; ++c) {
      const double r = (u.node(i)[c] - u.node(i - 1)[c]) / tau;
      rs += r * r;
    }
    sum_rate += tau * rs;
    problem.energy.gradient(std::span<const double>(u.node(i), d), grad);
    double gs = 0.0;
    for (int c = 0; c < d; ++c) gs += grad[c] * grad[c];
    sum_g += tau * gs;
  }
  return energy_at(problem, u.node(N)) - energy_at(problem, u.node(0)) +
         0.5 * sum_rate + 0.5 * sum_g;
}

EnergeticChecks energetic_checks(const Trajectory& u,
                                 const WideProblem& problem, int samples,
                                 double stability_slack, double balance_tol,
                                 std::uint64_t seed) {
  problem.validate();
  if (problem.rho != 0.0 ||
      problem.dissipation.kind != DissipationKind::OneHomogeneous) {
    throw WrongRegime("energetic checks need rho=0 and one-homogeneous dissipation");
  }
  const long N = problem.grid.steps;
  const double tau = problem.grid.tau;
  const double alpha = problem.dissipation.alpha;
  const int d = problem.dim();

  auto forced_energy = [&](long i, const double* x) {
    double e = energy_at(problem, x);
    const double* f = problem.energy.forcing_at(i);
    if (f) {
      for (int c = 0; c < d; ++c) e -= f[c] * x[c];
    }
    return e;
  };

  // Trajectory diameter (sup over node pairs = componentwise range).
  double diam = 0.0;
  for (int c = 0; c < d; ++c) {
    double lo = u.node(0)[c], hi = u.node(0)[c];
    for (long i = 1; i <= N; ++i) {
      lo = std::min(lo, u.node(i)[c]);
      hi = std::max(hi, u.node(i)[c]);
    }
    diam = std::max(diam, hi - lo);
  }
  const double radius = 3.0 * diam;

  EnergeticChecks out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> comp(static_cast<size_t>(d));
  double worst = 0.0;
  for (long i = 0; i <= N; ++i) {
    const double base = forced_energy(i, u.node(i));
    for (int s = 0; s < samples; ++s) {
      double jump = 0.0;
      for (int c = 0; c < d; ++c) {
        comp[static_cast<size_t>(c)] = u.node(i)[c] + radius * unit(rng);
        jump += std::abs(comp[static_cast<size_t>(c)] - u.node(i)[c]);
      }
      const double rhs = forced_energy(i, comp.data()) + alpha * jump;
      worst = std::max(worst, base - rhs);
    }
  }
  out.worst_stability_violation = worst;
  out.stability_pass = worst <= stability_slack;

  double variation = 0.0;
  for (long i = 1; i <= N; ++i) {
    for (int c = 0; c < d; ++c) {
      variation += alpha * std::abs(u.node(i)[c] - u.node(i - 1)[c]);
    }
  }
  double work = 0.0;
  if (problem.energy.has_forcing()) {
    for (long i = 1; i <= N; ++i) {
      const double* fi = problem.energy.forcing_at(i);
      const double* fm = problem.energy.forcing_at(i - 1);
      for (int c = 0; c < d; ++c) {
        work += tau * ((fi[c] - fm[c]) / tau) * u.node(i)[c];
      }
    }
  }
  out.balance_defect = std::abs(forced_energy(N, u.node(N)) + variation -
                                forced_energy(0, u.node(0)) + work);
  out.balance_pass = out.balance_defect <= balance_tol;
  return out;
}

}  // namespace wide
