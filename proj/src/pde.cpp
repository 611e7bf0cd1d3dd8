#include "wide/pde.hpp"

#include <cmath>
#include <utility>

#include "wide/dissipation.hpp"
#include "wide/errors.hpp"
#include "wide/grid.hpp"

namespace wide {

SpatialMesh SpatialMesh::make(double length, int interior_points) {
  if (!(length > 0.0)) throw InvalidParams("mesh length must be positive");
  if (interior_points < 1) {
    throw GridTooShort("mesh needs at least one interior point");
  }
  SpatialMesh mesh;
  mesh.length = length;
  mesh.interior_points = interior_points;
  mesh.h = length / (interior_points + 1);
  return mesh;
}

void SpatialMesh::apply_stiffness(const std::vector<double>& x,
                                  std::vector<double>& y) const {
  const int M = interior_points;
  if (static_cast<int>(x.size()) != M) {
    throw ShapeMismatch("stiffness input has wrong length");
  }
  y.assign(static_cast<size_t>(M), 0.0);
  const double inv = 1.0 / (h * h);
  for (int j = 0; j < M; ++j) {
    double v = 2.0 * x[static_cast<size_t>(j)];
    if (j > 0) v -= x[static_cast<size_t>(j - 1)];
    if (j + 1 < M) v -= x[static_cast<size_t>(j + 1)];
    y[static_cast<size_t>(j)] = inv * v;
  }
}

double SpatialMesh::smallest_eigenvalue(int k) const {
  return 2.0 / (h * h) * (1.0 - std::cos(k * M_PI * h / length));
}

ScalarNonlinearity no_nonlinearity() {
  ScalarNonlinearity g;
  g.G = [](double) { return 0.0; };
  g.gamma = [](double) { return 0.0; };
  g.dgamma = [](double) { return 0.0; };
  g.convexity = 0.0;
  g.linear = true;
  g.linear_coeff = 0.0;
  return g;
}

ScalarNonlinearity linear_nonlinearity(double c) {
  ScalarNonlinearity g;
  g.G = [c](double u) { return 0.5 * c * u * u; };
  g.gamma = [c](double u) { return c * u; };
  g.dgamma = [c](double) { return c; };
  g.convexity = c;
  g.linear = true;
  g.linear_coeff = c;
  return g;
}

ScalarNonlinearity odd_power_nonlinearity(int k) {
  if (k < 1) throw InvalidGrowth("odd-power exponent index must be >= 1");
  if (k == 1) return linear_nonlinearity(1.0);
  ScalarNonlinearity g;
  const int q = 2 * k;
  g.G = [q](double u) { return std::pow(u, q) / q; };
  g.gamma = [q](double u) { return std::pow(u, q - 1); };
  g.dgamma = [q](double u) { return (q - 1) * std::pow(u, q - 2); };
  g.convexity = 0.0;
  g.linear = false;
  return g;
}

EnergyModel discretize_gradient_flow(const SpatialMesh& mesh,
                                     const ScalarNonlinearity& g) {
  const int M = mesh.interior_points;
  const double h = mesh.h;
  EnergyModel E;
  E.dim = M;
  E.name = "pde_dirichlet";
  E.lambda_convexity = h * (mesh.smallest_eigenvalue(1) +
                            std::min(g.convexity, 0.0));
  const SpatialMesh m = mesh;
  const ScalarNonlinearity gn = g;
  E.value = [m, gn, h, M](std::span<const double> u) {
    // (h/2) u^T L u expanded through the difference quotients, plus the
    // nodewise density h*G; the boundary values are 0.
    double quad = 0.0;
    for (int j = 0; j <= M; ++j) {
      const double left = j == 0 ? 0.0 : u[static_cast<size_t>(j - 1)];
      const double right = j == M ? 0.0 : u[static_cast<size_t>(j)];
      const double slope = (right - left) / m.h;
      quad += 0.5 * m.h * slope * slope;
    }
    double dens = 0.0;
    for (int j = 0; j < M; ++j) dens += gn.G(u[static_cast<size_t>(j)]);
    return quad + h * dens;
  };
  E.gradient = [m, gn, h, M](std::span<const double> u, std::span<double> out) {
    const double inv = 1.0 / (m.h * m.h);
    for (int j = 0; j < M; ++j) {
      double v = 2.0 * u[static_cast<size_t>(j)];
      if (j > 0) v -= u[static_cast<size_t>(j - 1)];
      if (j + 1 < M) v -= u[static_cast<size_t>(j + 1)];
      out[static_cast<size_t>(j)] =
          h * (inv * v + gn.gamma(u[static_cast<size_t>(j)]));
    }
  };
  E.hessian = [m, gn, h, M](std::span<const double> u, std::span<double> out) {
    const double inv = 1.0 / (m.h * m.h);
    for (size_t idx = 0; idx < static_cast<size_t>(M) * M; ++idx) out[idx] = 0.0;
    for (int j = 0; j < M; ++j) {
      out[static_cast<size_t>(j) * M + j] =
          h * (2.0 * inv + gn.dgamma(u[static_cast<size_t>(j)]));
      if (j > 0) out[static_cast<size_t>(j) * M + (j - 1)] = -h * inv;
      if (j + 1 < M) out[static_cast<size_t>(j) * M + (j + 1)] = -h * inv;
    }
  };
  if (g.linear) {
    E.quadratic_matrix.assign(static_cast<size_t>(M) * M, 0.0);
    const double inv = 1.0 / (h * h);
    for (int j = 0; j < M; ++j) {
      E.quadratic_matrix[static_cast<size_t>(j) * M + j] =
          h * (2.0 * inv + g.linear_coeff);
      if (j > 0) E.quadratic_matrix[static_cast<size_t>(j) * M + (j - 1)] = -h * inv;
      if (j + 1 < M) {
        E.quadratic_matrix[static_cast<size_t>(j) * M + (j + 1)] = -h * inv;
      }
    }
  }
  return E;
}

WideProblem discretize_wave(const SpatialMesh& mesh,
                            const ScalarNonlinearity& g,
                            const WaveDiscretization& d,
                            const std::vector<double>& u0,
                            const std::vector<double>& u1, double horizon,
                            long steps) {
  if (!(d.rho_phys > 0.0)) throw InvalidParams("wave density must be positive");
  if (d.nu < 0.0) throw InvalidParams("damping must be nonnegative");
  WideProblem problem;
  problem.grid = TimeGrid::make(horizon, steps);
  problem.energy = discretize_gradient_flow(mesh, g);
  problem.rho = mesh.h * d.rho_phys;
  if (d.zeta_p.has_value()) {
    const double p = *d.zeta_p;
    if (!(p > 1.0) || !std::isfinite(p)) {
      throw InvalidGrowth("nonlinear damping exponent must lie in (1, inf)");
    }
    problem.dissipation = power_dissipation(p, mesh.h * d.zeta_coeff);
  } else {
    problem.dissipation = quadratic_dissipation(mesh.h * d.nu);
  }
  problem.u0 = u0;
  problem.u1 = u1;
  problem.spatial_h = mesh.h;
  problem.validate();
  return problem;
}

WideProblem discretize_heat(const SpatialMesh& mesh,
                            const ScalarNonlinearity& g, double nu,
                            const std::vector<double>& u0, double horizon,
                            long steps) {
  if (!(nu > 0.0)) throw InvalidParams("heat viscosity must be positive");
  WideProblem problem;
  problem.grid = TimeGrid::make(horizon, steps);
  problem.energy = discretize_gradient_flow(mesh, g);
  problem.rho = 0.0;
  problem.dissipation = quadratic_dissipation(mesh.h * nu);
  problem.u0 = u0;
  problem.spatial_h = mesh.h;
  problem.validate();
  return problem;
}

std::vector<double> mode_initializer(const SpatialMesh& mesh, int k) {
  if (k < 1 || k > mesh.interior_points) {
    throw ModeOutOfRange("mode index must lie in [1, interior points]");
  }
  std::vector<double> u(static_cast<size_t>(mesh.interior_points));
  for (int j = 1; j <= mesh.interior_points; ++j) {
    u[static_cast<size_t>(j - 1)] =
        std::sin(k * M_PI * mesh.node(j) / mesh.length);
  }
  return u;
}

double spatial_l2(const SpatialMesh& mesh, const std::vector<double>& a) {
  if (static_cast<int>(a.size()) != mesh.interior_points) {
    throw ShapeMismatch("vector length does not match the mesh");
  }
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(mesh.h * s);
}

double space_time_l2_distance(const SpatialMesh& mesh, const Trajectory& u,
                              const Trajectory& v) {
  if (u.dim != v.dim || u.grid.steps != v.grid.steps ||
      u.dim != mesh.interior_points) {
    throw ShapeMismatch("trajectories do not share a grid and mesh");
  }
  double s = 0.0;
  for (long i = 0; i <= u.grid.steps; ++i) {
    const double* a = u.node(i);
    const double* b = v.node(i);
    double node = 0.0;
    for (int c = 0; c < u.dim; ++c) {
      const double diff = a[c] - b[c];
      node += diff * diff;
    }
    s += u.grid.tau * mesh.h * node;
  }
  return std::sqrt(s);
}

}  // namespace wide
