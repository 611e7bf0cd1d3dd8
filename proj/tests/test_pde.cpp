#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wide/errors.hpp"
#include "wide/minimize.hpp"
#include "wide/oracles.hpp"
#include "wide/pde.hpp"

using namespace wide;

TEST_CASE("mesh geometry and the discrete eigenvalue formula") {
  SpatialMesh mesh = SpatialMesh::make(1.0, 7);
  CHECK(mesh.h == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(mesh.node(3) == doctest::Approx(0.375).epsilon(1e-15));
  const double h = mesh.h;
  for (int k = 1; k <= 7; ++k) {
    const double expected = (2.0 / (h * h)) * (1.0 - std::cos(k * M_PI * h));
    CHECK(mesh.smallest_eigenvalue(k) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
  // The smallest eigenvalue lies below pi^2 and approaches it from below.
  CHECK(mesh.smallest_eigenvalue(1) < M_PI * M_PI);
  SpatialMesh finer = SpatialMesh::make(1.0, 15);
  CHECK(finer.smallest_eigenvalue(1) > mesh.smallest_eigenvalue(1));
}

TEST_CASE("stiffness action is symmetric positive definite") {
  SpatialMesh mesh = SpatialMesh::make(2.0, 9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> x(9), y(9), Lx(9), Ly(9);
  for (int t = 0; t < 5; ++t) {
    for (int j = 0; j < 9; ++j) {
      x[j] = unif(rng);
      y[j] = unif(rng);
    }
    mesh.apply_stiffness(x, Lx);
    mesh.apply_stiffness(y, Ly);
    double xy = 0.0, yx = 0.0, xx = 0.0;
    for (int j = 0; j < 9; ++j) {
      xy += Lx[j] * y[j];
      yx += Ly[j] * x[j];
      xx += Lx[j] * x[j];
    }
    CHECK(xy == doctest::Approx(yx).epsilon(1e-12));
    CHECK(xx > 0.0);
  }
  std::vector<double> wrong(8);
  CHECK_THROWS_AS(mesh.apply_stiffness(wrong, Lx), ShapeMismatch);
}

TEST_CASE("modes are discretely orthogonal with known norm") {
  SpatialMesh mesh = SpatialMesh::make(1.0, 12);
  std::vector<double> m1 = mode_initializer(mesh, 1);
  std::vector<double> m3 = mode_initializer(mesh, 3);
  double dot = 0.0;
  for (int j = 0; j < 12; ++j) dot += m1[j] * m3[j];
  CHECK(std::abs(dot) <= 1e-12);
  // ||sin(k pi x)||_h = sqrt(L/2) exactly on the uniform mesh.
  CHECK(spatial_l2(mesh, m1) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
  CHECK_THROWS_AS(mode_initializer(mesh, 13), ModeOutOfRange);
  CHECK_THROWS_AS(mode_initializer(mesh, 0), ModeOutOfRange);
}

TEST_CASE("discrete energy of the first mode converges at second order") {
  // E(sin(pi x)) = mu_1/4 exactly, and mu_1/4 -> pi^2/4 like h^2.
  double prev_err = 0.0;
  for (int M : {16, 33}) {
    SpatialMesh mesh = SpatialMesh::make(1.0, M);
    EnergyModel e = discretize_gradient_flow(mesh, no_nonlinearity());
    std::vector<double> u = mode_initializer(mesh, 1);
    const double val = e.value(u);
    CHECK(val ==
          doctest::Approx(mesh.smallest_eigenvalue(1) / 4.0).epsilon(1e-12));
    const double err = std::abs(val - M_PI * M_PI / 4.0);
    CHECK(err <= 2.5 * mesh.h * mesh.h);
    if (M == 33) {
      // h halves from M=16 to M=33, so the error drops about fourfold.
      CHECK(err <= 0.35 * prev_err);
    }
    prev_err = err;
  }
}

TEST_CASE("nonlinearity factories expose growth and convexity") {
  ScalarNonlinearity cubic = odd_power_nonlinearity(2);
  CHECK(cubic.gamma(2.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(cubic.G(2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(cubic.dgamma(2.0) == doctest::Approx(12.0).epsilon(1e-15));
  CHECK_FALSE(cubic.linear);

  ScalarNonlinearity lin = linear_nonlinearity(3.0);
  CHECK(lin.linear);
  CHECK(lin.linear_coeff == 3.0);
  CHECK(lin.gamma(0.5) == doctest::Approx(1.5).epsilon(1e-15));

  CHECK_THROWS_AS(odd_power_nonlinearity(0), InvalidGrowth);
}

TEST_CASE("heat mode decays at the discrete eigenvalue rate") {
  SpatialMesh mesh = SpatialMesh::make(1.0, 16);
  std::vector<double> u0 = mode_initializer(mesh, 1);
  WideProblem p = discretize_heat(mesh, no_nonlinearity(), 1.0, u0, 0.5, 2000);
  SolveResult r = solve_auto(p, weights_for(p, 1e-4));
  CHECK(r.report.converged);
  const double mu = mesh.smallest_eigenvalue(1);
  double worst = 0.0;
  for (long i : {400L, 1000L, 2000L}) {
    const double t = p.grid.node(i);
    std::vector<double> diff(16);
    for (int j = 0; j < 16; ++j)
      diff[j] = r.trajectory.node(i)[j] - std::exp(-mu * t) * u0[j];
    worst = std::max(worst, spatial_l2(mesh, diff) /
                                (std::exp(-mu * t) * spatial_l2(mesh, u0)));
  }
  CHECK(worst <= 2e-2);
}

TEST_CASE("undamped wave stays within reach of leapfrog and the mode") {
  SpatialMesh mesh = SpatialMesh::make(1.0, 8);
  std::vector<double> u0 = mode_initializer(mesh, 1);
  std::vector<double> u1(8, 0.0);
  WaveDiscretization wd;
  wd.rho_phys = 1.0;
  wd.nu = 0.0;
  WideProblem p = discretize_wave(mesh, no_nonlinearity(), wd, u0, u1, 0.5, 200);
  CHECK(p.rho == doctest::Approx(mesh.h).epsilon(1e-15));
  CHECK(p.spatial_h == doctest::Approx(mesh.h).epsilon(1e-15));

  ReferenceSolution lf = leapfrog_wave(p);
  SolveResult r = solve_auto(p, weights_for(p, 1e-3));
  CHECK(r.report.converged);
  CHECK(space_time_l2_distance(mesh, r.trajectory, lf.trajectory) <= 0.01);

  const double mu = mesh.smallest_eigenvalue(1);
  double sup = 0.0;
  for (long i = 0; i <= 200; ++i) {
    const double t = p.grid.node(i);
    std::vector<double> diff(8);
    for (int j = 0; j < 8; ++j)
      diff[j] =
          r.trajectory.node(i)[j] - std::cos(std::sqrt(mu) * t) * u0[j];
    sup = std::max(sup, spatial_l2(mesh, diff));
  }
  CHECK(sup <= 0.03);
}

TEST_CASE("wave discretization folds the mesh weight into every term") {
  SpatialMesh mesh = SpatialMesh::make(1.0, 5);
  std::vector<double> u0(5, 0.1), u1(5, 0.0);

  WaveDiscretization damped;
  damped.rho_phys = 2.0;
  damped.nu = 3.0;
  WideProblem p = discretize_wave(mesh, no_nonlinearity(), damped, u0, u1,
                                  1.0, 10);
  CHECK(p.rho == doctest::Approx(2.0 * mesh.h).epsilon(1e-15));
  CHECK(p.dissipation.kind == DissipationKind::Quadratic);
  CHECK(p.dissipation.nu == doctest::Approx(3.0 * mesh.h).epsilon(1e-15));

  WaveDiscretization plaw;
  plaw.rho_phys = 1.0;
  plaw.zeta_p = 3.0;
  plaw.zeta_coeff = 2.0;
  WideProblem q =
      discretize_wave(mesh, no_nonlinearity(), plaw, u0, u1, 1.0, 10);
  CHECK(q.dissipation.kind == DissipationKind::PowerLaw);
  CHECK(q.dissipation.p == 3.0);
  CHECK(q.dissipation.coeff == doctest::Approx(2.0 * mesh.h).epsilon(1e-15));

  // Second node honors the initial rate.
  Trajectory t = q.constrained_trajectory();
  CHECK(t.node(1)[2] == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("discretization factories validate their inputs") {
  SpatialMesh mesh = SpatialMesh::make(1.0, 5);
  std::vector<double> u0(5, 0.1), u1(5, 0.0);

  CHECK_THROWS_AS(SpatialMesh::make(0.0, 5), InvalidParams);
  CHECK_THROWS_AS(SpatialMesh::make(1.0, 0), GridTooShort);

  CHECK_THROWS_AS(
      discretize_heat(mesh, no_nonlinearity(), 0.0, u0, 1.0, 10),
      InvalidParams);
  std::vector<double> wrong(4, 0.1);
  CHECK_THROWS_AS(
      discretize_heat(mesh, no_nonlinearity(), 1.0, wrong, 1.0, 10),
      ShapeMismatch);

  WaveDiscretization bad_density;
  bad_density.rho_phys = 0.0;
  CHECK_THROWS_AS(
      discretize_wave(mesh, no_nonlinearity(), bad_density, u0, u1, 1.0, 10),
      InvalidParams);
  WaveDiscretization bad_exponent;
  bad_exponent.zeta_p = 1.0;
  CHECK_THROWS_AS(
      discretize_wave(mesh, no_nonlinearity(), bad_exponent, u0, u1, 1.0, 10),
      InvalidGrowth);
}

TEST_CASE("space-time distance has the exact product-quadrature value") {
  SpatialMesh mesh = SpatialMesh::make(1.0, 4);
  TimeGrid grid = TimeGrid::make(1.0, 10);
  Trajectory a = Trajectory::zeros(grid, 4);
  Trajectory b = Trajectory::zeros(grid, 4);
  for (long i = 0; i <= 10; ++i)
    for (int c = 0; c < 4; ++c) b.node(i)[c] = 0.5;
  // Constant gap c over (N+1) nodes: sqrt((N+1) tau h M c^2).
  const double expected = 0.5 * std::sqrt(11.0 * 0.1 * mesh.h * 4.0);
  CHECK(space_time_l2_distance(mesh, a, b) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK(space_time_l2_distance(mesh, a, a) == 0.0);

  Trajectory c = Trajectory::zeros(TimeGrid::make(1.0, 11), 4);
  CHECK_THROWS_AS(space_time_l2_distance(mesh, a, c), ShapeMismatch);
  std::vector<double> short_vec(3);
  CHECK_THROWS_AS(spatial_l2(mesh, short_vec), ShapeMismatch);
}
