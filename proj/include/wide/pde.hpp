#pragma once

#include <optional>
#include <vector>

#include "wide/energy.hpp"
#include "wide/problem.hpp"

namespace wide {

// Uniform 1D mesh on (0, L) with homogeneous Dirichlet walls: M interior
// points x_j = j*h, h = L/(M+1). The stiffness operator is the symmetric
// positive definite tridiagonal (1/h^2) tridiag(-1, 2, -1); its smallest
// eigenvalue is (2/h^2)(1 - cos(pi h / L)).
struct SpatialMesh {
  double length = 1.0;
  int interior_points = 0;
  double h = 0.0;

  static SpatialMesh make(double length, int interior_points);

  double node(int j) const { return h * j; }  // j = 1..M
  // y = (stiffness) x for interior vectors.
  void apply_stiffness(const std::vector<double>& x,
                       std::vector<double>& y) const;
  double smallest_eigenvalue(int k = 1) const;  // (2/h^2)(1-cos(k pi h/L))
};

// Scalar nonlinearity gamma with primitive G (E-part h*sum G(u_j)); the
// declared convexity bound is the infimum of G''.
struct ScalarNonlinearity {
  std::function<double(double)> G;       // primitive, G' = gamma
  std::function<double(double)> gamma;
  std::function<double(double)> dgamma;  // gamma'
  double convexity = 0.0;                // inf G''
  bool linear = false;                   // gamma(u) = c*u
  double linear_coeff = 0.0;
};
ScalarNonlinearity no_nonlinearity();
ScalarNonlinearity linear_nonlinearity(double c);
// gamma(u) = u^{2k-1}, G(u) = u^{2k}/(2k); k=2 gives the quartic density.
ScalarNonlinearity odd_power_nonlinearity(int k);

// E(u) = (h/2) u^T L u + h sum_j G(u_j); gradient h(Lu + gamma(u));
// quadratic_matrix populated when gamma is linear.
EnergyModel discretize_gradient_flow(const SpatialMesh& mesh,
                                     const ScalarNonlinearity& g);

// Second-order problem factory: rho_phys u_tt + damping + (-Delta u +
// gamma(u)) = 0 discretized with lumped mass h, folded consistently into
// inertia (rho = h*rho_phys), dissipation (h*nu or h*coeff) and energy.
// zeta_p > 0 selects PowerLaw nonlinear damping D(v) = h*coeff/p |v|^p.
struct WaveDiscretization {
  double rho_phys = 1.0;
  double nu = 0.0;
  std::optional<double> zeta_p;      // PowerLaw exponent when present
  double zeta_coeff = 1.0;
};
WideProblem discretize_wave(const SpatialMesh& mesh,
                            const ScalarNonlinearity& g,
                            const WaveDiscretization& d,
                            const std::vector<double>& u0,
                            const std::vector<double>& u1, double horizon,
                            long steps);

// First-order problem factory (gradient flow): nu u_t = -(Lu + gamma(u)).
WideProblem discretize_heat(const SpatialMesh& mesh,
                            const ScalarNonlinearity& g, double nu,
                            const std::vector<double>& u0, double horizon,
                            long steps);

// u_j = sin(k pi x_j / L), j = 1..M; 1 <= k <= M.
std::vector<double> mode_initializer(const SpatialMesh& mesh, int k);

// Discrete space-(time) L2 norms used by the PDE experiments.
double spatial_l2(const SpatialMesh& mesh, const std::vector<double>& a);
double space_time_l2_distance(const SpatialMesh& mesh, const Trajectory& u,
                              const Trajectory& v);

}  // namespace wide
