#include "wide/functional.hpp"

#include <cmath>
#include <span>
#include <vector>

#include "wide/errors.hpp"
#include "wide/parallel.hpp"

namespace wide {

namespace {

void check_shapes(const WideProblem& problem, const Trajectory& u) {
  if (u.dim != problem.dim()) throw ShapeMismatch("trajectory dimension");
  if (u.grid.steps != problem.grid.steps) {
    throw ShapeMismatch("trajectory node count");
  }
  if (u.values.size() !=
      static_cast<size_t>(u.grid.steps + 1) * static_cast<size_t>(u.dim)) {
    throw ShapeMismatch("trajectory storage length");
  }
}

void check_constraints(const WideProblem& problem, const Trajectory& u) {
  const int d = problem.dim();
  const double* u0node = u.node(0);
  for (int c = 0; c < d; ++c) {
    const double want = problem.u0[c];
    if (std::abs(u0node[c] - want) > 1e-9 * (1.0 + std::abs(want))) {
      throw ConstraintViolated("first node differs from the initial state");
    }
  }
  if (problem.rho > 0.0) {
    const double* u1node = u.node(1);
    for (int c = 0; c < d; ++c) {
      const double want = problem.u0[c] + problem.grid.tau * (*problem.u1)[c];
      if (std::abs(u1node[c] - want) > 1e-9 * (1.0 + std::abs(want))) {
        throw ConstraintViolated("second node differs from the initial rate");
      }
    }
  }
}

// Per-component dissipation derivative (all variants are separable).
double diss_deriv_scalar(const DissipationModel& D, double w) {
  switch (D.kind) {
    case DissipationKind::Quadratic:
      return D.nu * w;
    case DissipationKind::PowerLaw:
      return w == 0.0 ? 0.0
                      : D.coeff * std::pow(std::abs(w), D.p - 1.0) *
                            (w > 0.0 ? 1.0 : -1.0);
    case DissipationKind::OneHomogeneous:
      throw NonSmoothDissipation("derivative undefined at zero rate");
  }
  return 0.0;
}

void require_gradient_smooth(const DissipationModel& D) {
  if (!D.smooth()) {
    throw NonSmoothDissipation(
        "gradient path requires quadratic or p >= 2 power-law dissipation");
  }
}

void require_deriv_exists(const DissipationModel& D) {
  if (D.kind == DissipationKind::OneHomogeneous) {
    throw NonSmoothDissipation(
        "rate-independent dissipation has no single-valued derivative");
  }
}

// d x d second derivative of the energy at u: exact when available,
// quadratic matrix when exact-quadratic, otherwise central differences of
// the gradient (symmetrized).
void energy_hessian_block(const EnergyModel& E, const double* u,
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
  for (int r = 0; r < d; ++r) {
    for (int c = r + 1; c < d; ++c) {
      const double s = 0.5 * (H[static_cast<size_t>(r) * d + c] +
                              H[static_cast<size_t>(c) * d + r]);
      H[static_cast<size_t>(r) * d + c] = s;
      H[static_cast<size_t>(c) * d + r] = s;
    }
  }
}

}  // namespace

double eval_functional(const WideProblem& problem, const WeightScheme& w,
                       const Trajectory& u) {
  check_shapes(problem, u);
  check_constraints(problem, u);
  const long i0 = problem.first_free();
  const long count = problem.free_nodes();
  const double tau = problem.grid.tau;
  const int d = problem.dim();
  const double inertia_factor = 0.5 * w.eps_hat * w.eps_hat * problem.rho;
  const double rate_factor = problem.rho > 0.0 ? w.eps_hat : w.epsilon;

  const double total = chunked_sum(
      static_cast<size_t>(count), [&](size_t idx) -> double {
        const long i = i0 + static_cast<long>(idx);
        const double* ui = u.node(i);
        const double* um1 = u.node(i - 1);
        double acc;
        if (d == 1) {
          const double rate = (ui[0] - um1[0]) / tau;
          acc = rate_factor *
                problem.dissipation.value(std::span<const double>(&rate, 1));
        } else {
          std::vector<double> rate(d);
          for (int c = 0; c < d; ++c) rate[c] = (ui[c] - um1[c]) / tau;
          acc = rate_factor * problem.dissipation.value(rate);
        }
        if (problem.rho > 0.0) {
          const double* um2 = u.node(i - 2);
          double s = 0.0;
          for (int c = 0; c < d; ++c) {
            const double a =
                (ui[c] - 2.0 * um1[c] + um2[c]) / (tau * tau);
            s += a * a;
          }
          acc += inertia_factor * s;
        }
        double energy = problem.energy.value(std::span<const double>(ui, d));
        if (problem.energy.has_forcing()) {
          const double* f = problem.energy.forcing_at(i);
          double fu = 0.0;
          for (int c = 0; c < d; ++c) fu += f[c] * ui[c];
          energy -= fu;
        }
        acc += w.c_eps * energy;
        return tau * w.e[static_cast<size_t>(i)] * acc;
      });
  if (!std::isfinite(total)) {
    throw NonFiniteValue("objective evaluated to a non-finite value");
  }
  return total;
}

namespace {

// Shared precomputation for derivative evaluations: discrete rates,
// per-component dissipation derivatives, and (rho > 0) second differences
// at every node the free rows touch.
struct Stencils {
  long i0 = 0;
  long N = 0;
  int d = 1;
  double tau = 0.0;
  std::vector<double> rate;        // delta u_i, i in [i0, N], flattened
  std::vector<double> rate_deriv;  // D'(delta u_i) componentwise
  std::vector<double> accel;       // delta2 u_i (rho > 0 only)

  const double* rate_at(long i) const {
    return rate.data() + static_cast<size_t>(i - i0) * d;
  }
  const double* rate_deriv_at(long i) const {
    return rate_deriv.data() + static_cast<size_t>(i - i0) * d;
  }
  const double* accel_at(long i) const {
    return accel.data() + static_cast<size_t>(i - i0) * d;
  }
};

Stencils build_stencils(const WideProblem& problem, const Trajectory& u,
                        bool with_deriv) {
  Stencils s;
  s.i0 = problem.first_free();
  s.N = problem.grid.steps;
  s.d = problem.dim();
  s.tau = problem.grid.tau;
  const long count = s.N - s.i0 + 1;
  s.rate.resize(static_cast<size_t>(count) * s.d);
  if (with_deriv) s.rate_deriv.resize(s.rate.size());
  if (problem.rho > 0.0) s.accel.resize(s.rate.size());
  for (long i = s.i0; i <= s.N; ++i) {
    const double* ui = u.node(i);
    const double* um1 = u.node(i - 1);
    double* r = s.rate.data() + static_cast<size_t>(i - s.i0) * s.d;
    for (int c = 0; c < s.d; ++c) r[c] = (ui[c] - um1[c]) / s.tau;
    if (with_deriv) {
      double* rd = s.rate_deriv.data() + static_cast<size_t>(i - s.i0) * s.d;
      for (int c = 0; c < s.d; ++c) {
        rd[c] = diss_deriv_scalar(problem.dissipation, r[c]);
      }
    }
    if (problem.rho > 0.0) {
      const double* um2 = u.node(i - 2);
      double* a = s.accel.data() + static_cast<size_t>(i - s.i0) * s.d;
      for (int c = 0; c < s.d; ++c) {
        a[c] = (ui[c] - 2.0 * um1[c] + um2[c]) / (s.tau * s.tau);
      }
    }
  }
  return s;
}

}  // namespace

std::vector<double> eval_gradient(const WideProblem& problem,
                                  const WeightScheme& w, const Trajectory& u) {
  check_shapes(problem, u);
  check_constraints(problem, u);
  require_gradient_smooth(problem.dissipation);
  const Stencils s = build_stencils(problem, u, true);
  const int d = s.d;
  const double rate_factor = problem.rho > 0.0 ? w.eps_hat : w.epsilon;
  const double inertia_row =
      w.eps_hat * w.eps_hat * problem.rho / s.tau;  // times e_j
  std::vector<double> grad(static_cast<size_t>(problem.free_nodes()) * d, 0.0);
  std::vector<double> egrad(d);
  for (long j = s.i0; j <= s.N; ++j) {
    const double ej = w.e[static_cast<size_t>(j)];
    double* g = grad.data() + static_cast<size_t>(j - s.i0) * d;
    const double* dpj = s.rate_deriv_at(j);
    const double* dpn = j + 1 <= s.N ? s.rate_deriv_at(j + 1) : nullptr;
    for (int c = 0; c < d; ++c) {
      double val = dpj[c];
      if (dpn) val -= w.kappa * dpn[c];
      g[c] += ej * rate_factor * val;
    }
    if (problem.rho > 0.0) {
      const double* aj = s.accel_at(j);
      const double* a1 = j + 1 <= s.N ? s.accel_at(j + 1) : nullptr;
      const double* a2 = j + 2 <= s.N ? s.accel_at(j + 2) : nullptr;
      for (int c = 0; c < d; ++c) {
        double val = aj[c];
        if (a1) val -= 2.0 * w.kappa * a1[c];
        if (a2) val += w.kappa * w.kappa * a2[c];
        g[c] += ej * inertia_row * val;
      }
    }
    const double* uj = u.node(j);
    problem.energy.gradient(std::span<const double>(uj, d), egrad);
    const double* f = problem.energy.forcing_at(j);
    for (int c = 0; c < d; ++c) {
      double val = egrad[c];
      if (f) val -= f[c];
      g[c] += s.tau * ej * w.c_eps * val;
    }
  }
  return grad;
}

std::vector<double> scaled_residual(const WideProblem& problem,
                                    const WeightScheme& w,
                                    const Trajectory& u) {
  check_shapes(problem, u);
  check_constraints(problem, u);
  require_deriv_exists(problem.dissipation);
  const Stencils s = build_stencils(problem, u, true);
  const int d = s.d;
  const double rate_factor = problem.rho > 0.0 ? w.eps_hat : w.epsilon;
  const double rate_scale = rate_factor / (s.tau * w.c_eps);
  const double inertia_scale =
      w.eps_hat * w.eps_hat * problem.rho / (s.tau * s.tau * w.c_eps);
  std::vector<double> res(static_cast<size_t>(problem.free_nodes()) * d, 0.0);
  std::vector<double> egrad(d);
  for (long j = s.i0; j <= s.N; ++j) {
    double* r = res.data() + static_cast<size_t>(j - s.i0) * d;
    const double* dpj = s.rate_deriv_at(j);
    const double* dpn = j + 1 <= s.N ? s.rate_deriv_at(j + 1) : nullptr;
    for (int c = 0; c < d; ++c) {
      double val = dpj[c];
      if (dpn) val -= w.kappa * dpn[c];
      r[c] += rate_scale * val;
    }
    if (problem.rho > 0.0) {
      const double* aj = s.accel_at(j);
      const double* a1 = j + 1 <= s.N ? s.accel_at(j + 1) : nullptr;
      const double* a2 = j + 2 <= s.N ? s.accel_at(j + 2) : nullptr;
      for (int c = 0; c < d; ++c) {
        double val = aj[c];
        if (a1) val -= 2.0 * w.kappa * a1[c];
        if (a2) val += w.kappa * w.kappa * a2[c];
        r[c] += inertia_scale * val;
      }
    }
    const double* uj = u.node(j);
    problem.energy.gradient(std::span<const double>(uj, d), egrad);
    const double* f = problem.energy.forcing_at(j);
    for (int c = 0; c < d; ++c) {
      double val = egrad[c];
      if (f) val -= f[c];
      r[c] += val;
    }
  }
  return res;
}

namespace {

enum class RowScaling { TrueHessian, ScaledResidual };

BandedMatrix second_derivative_matrix(const WideProblem& problem,
                                      const WeightScheme& w,
                                      const Trajectory& u,
                                      RowScaling scaling) {
  check_shapes(problem, u);
  check_constraints(problem, u);
  require_deriv_exists(problem.dissipation);
  const Stencils s = build_stencils(problem, u, false);
  const int d = s.d;
  const long free_count = problem.free_nodes();
  const int band = problem.rho > 0.0 ? 2 * d : d;
  BandedMatrix H = BandedMatrix::zeros(free_count * d, band, band);

  const double rate_factor = problem.rho > 0.0 ? w.eps_hat : w.epsilon;
  std::vector<double> eblock;
  for (long j = s.i0; j <= s.N; ++j) {
    const double ej = w.e[static_cast<size_t>(j)];
    // Row scale: tau*e_j*c_eps for the true Hessian rows, 1 after division.
    const double rate_row = scaling == RowScaling::TrueHessian
                                ? ej * rate_factor / s.tau
                                : rate_factor / (s.tau * s.tau * w.c_eps);
    const double inertia_row =
        scaling == RowScaling::TrueHessian
            ? ej * w.eps_hat * w.eps_hat * problem.rho / (s.tau * s.tau * s.tau)
            : w.eps_hat * w.eps_hat * problem.rho /
                  (s.tau * s.tau * s.tau * s.tau * w.c_eps);
    const double energy_row =
        scaling == RowScaling::TrueHessian ? s.tau * ej * w.c_eps : 1.0;
    const long r0 = (j - s.i0) * d;

    for (int c = 0; c < d; ++c) {
      const double curv_j = problem.dissipation.curvature(s.rate_at(j)[c]);
      const double curv_n = j + 1 <= s.N
                                ? problem.dissipation.curvature(
                                      s.rate_at(j + 1)[c])
                                : 0.0;
      double diag = curv_j;
      if (j + 1 <= s.N) diag += w.kappa * curv_n;
      H.at(r0 + c, r0 + c) += rate_row * diag;
      if (j - 1 >= s.i0) H.at(r0 + c, r0 + c - d) += -rate_row * curv_j;
      if (j + 1 <= s.N) {
        H.at(r0 + c, r0 + c + d) += -rate_row * w.kappa * curv_n;
      }
    }

    if (problem.rho > 0.0) {
      const double k1 = w.kappa;
      const double k2 = w.kappa * w.kappa;
      const bool has1 = j + 1 <= s.N;
      const bool has2 = j + 2 <= s.N;
      double c_diag = 1.0;
      if (has1) c_diag += 4.0 * k1;
      if (has2) c_diag += k2;
      double c_m1 = -2.0;
      if (has1) c_m1 -= 2.0 * k1;
      const double c_m2 = 1.0;
      double c_p1 = 0.0;
      if (has1) c_p1 -= 2.0 * k1;
      if (has2) c_p1 -= 2.0 * k2;
      const double c_p2 = has2 ? k2 : 0.0;
      for (int c = 0; c < d; ++c) {
        H.at(r0 + c, r0 + c) += inertia_row * c_diag;
        if (j - 1 >= s.i0) H.at(r0 + c, r0 + c - d) += inertia_row * c_m1;
        if (j - 2 >= s.i0) {
          H.at(r0 + c, r0 + c - 2 * d) += inertia_row * c_m2;
        }
        if (has1) H.at(r0 + c, r0 + c + d) += inertia_row * c_p1;
        if (has2) H.at(r0 + c, r0 + c + 2 * d) += inertia_row * c_p2;
      }
    }

    energy_hessian_block(problem.energy, u.node(j), eblock);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const double val = eblock[static_cast<size_t>(a) * d + b];
        if (val != 0.0) H.at(r0 + a, r0 + b) += energy_row * val;
      }
    }
  }
  return H;
}

}  // namespace

BandedMatrix hessian_matrix(const WideProblem& problem, const WeightScheme& w,
                            const Trajectory& u) {
  return second_derivative_matrix(problem, w, u, RowScaling::TrueHessian);
}

BandedMatrix scaled_jacobian(const WideProblem& problem, const WeightScheme& w,
                             const Trajectory& u) {
  return second_derivative_matrix(problem, w, u, RowScaling::ScaledResidual);
}

HessianOperator hessian_operator(const WideProblem& problem,
                                 const WeightScheme& w, const Trajectory& u) {
  return HessianOperator{hessian_matrix(problem, w, u)};
}

namespace {

void require_linear_scalar(const WideProblem& problem) {
  if (problem.rho != 0.0) {
    throw ShapeMismatch("banded assembly requires a first-order problem");
  }
  if (problem.dissipation.kind != DissipationKind::Quadratic) {
    throw ShapeMismatch("banded assembly requires quadratic dissipation");
  }
  if (!problem.energy.is_quadratic()) {
    throw ShapeMismatch("banded assembly requires an exact quadratic energy");
  }
  if (!(problem.dissipation.nu > 0.0)) {
    throw InvalidParams("banded assembly requires a positive viscosity");
  }
}

void check_negative_lambda(double lambda, double tau) {
  if (lambda < 0.0 && tau >= -1.0 / lambda) {
    throw SingularityRisk(
        "negative stiffness requires the step below the singularity bound");
  }
}

}  // namespace

BandedSystem assemble_linear_system(const WideProblem& problem,
                                    const WeightScheme& w) {
  require_linear_scalar(problem);
  if (problem.dim() != 1) {
    throw ShapeMismatch("scalar assembly requires dimension 1");
  }
  const double lambda = problem.energy.quadratic_matrix[0];
  const double nu = problem.dissipation.nu;
  const double eps = w.epsilon;
  const double tau = problem.grid.tau;
  check_negative_lambda(lambda, tau);

  const long n = problem.grid.steps;  // free nodes 1..N
  BandedSystem sys;
  sys.dim = 1;
  sys.A = BandedMatrix::zeros(n, 1, 1);
  sys.b.assign(static_cast<size_t>(n), 0.0);

  const double diag_interior = nu * (2.0 * eps + tau) + lambda * tau * tau;
  const double sub_interior = -(nu * (eps + tau));
  const double sup_entry = -(nu * eps);
  for (long r = 0; r + 1 < n; ++r) {
    sys.A.at(r, r) = diag_interior;
    sys.A.at(r, r + 1) = sup_entry;
    if (r > 0) sys.A.at(r, r - 1) = sub_interior;
  }
  sys.A.at(n - 1, n - 2) = -(nu * eps);
  sys.A.at(n - 1, n - 1) = nu * eps;

  sys.b[0] = nu * (eps + tau) * problem.u0[0];
  if (problem.energy.has_forcing()) {
    for (long r = 0; r + 1 < n; ++r) {
      sys.b[static_cast<size_t>(r)] +=
          tau * tau * problem.energy.forcing_at(r + 1)[0];
    }
    // Last row stays the homogeneous natural final condition.
  }
  return sys;
}

BandedSystem assemble_linear_system_blocks(const WideProblem& problem,
                                           const WeightScheme& w) {
  require_linear_scalar(problem);
  const int d = problem.dim();
  const double nu = problem.dissipation.nu;
  const double eps = w.epsilon;
  const double tau = problem.grid.tau;
  check_negative_lambda(problem.energy.lambda_convexity, tau);

  const long nodes = problem.grid.steps;  // free nodes 1..N
  const long n = nodes * d;
  BandedSystem sys;
  sys.dim = d;
  sys.A = BandedMatrix::zeros(n, 2 * d - 1, 2 * d - 1);
  sys.b.assign(static_cast<size_t>(n), 0.0);

  const std::vector<double>& L = problem.energy.quadratic_matrix;
  const double diag_visc = nu * (2.0 * eps + tau);
  const double sub_entry = -(nu * (eps + tau));
  const double sup_entry = -(nu * eps);
  for (long blk = 0; blk + 1 < nodes; ++blk) {
    const long r0 = blk * d;
    for (int c = 0; c < d; ++c) {
      sys.A.at(r0 + c, r0 + c) += diag_visc;
      sys.A.at(r0 + c, r0 + c + d) = sup_entry;
      if (blk > 0) sys.A.at(r0 + c, r0 + c - d) = sub_entry;
      for (int b = 0; b < d; ++b) {
        const double val = L[static_cast<size_t>(c) * d + b];
        if (val != 0.0) sys.A.at(r0 + c, r0 + b) += tau * tau * val;
      }
    }
  }
  const long last = (nodes - 1) * d;
  for (int c = 0; c < d; ++c) {
    sys.A.at(last + c, last + c - d) = -(nu * eps);
    sys.A.at(last + c, last + c) = nu * eps;
  }

  for (int c = 0; c < d; ++c) {
    sys.b[static_cast<size_t>(c)] = nu * (eps + tau) * problem.u0[c];
  }
  if (problem.energy.has_forcing()) {
    for (long blk = 0; blk + 1 < nodes; ++blk) {
      const double* f = problem.energy.forcing_at(blk + 1);
      for (int c = 0; c < d; ++c) {
        sys.b[static_cast<size_t>(blk * d + c)] += tau * tau * f[c];
      }
    }
  }
  return sys;
}

}  // namespace wide
