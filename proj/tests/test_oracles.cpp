#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wide/errors.hpp"
#include "wide/oracles.hpp"

using namespace wide;

namespace {

WideProblem scalar_flow(double lambda, double nu, double horizon, long steps,
                        double u0) {
  WideProblem p;
  p.grid = TimeGrid::make(horizon, steps);
  p.energy = quadratic_energy(lambda, 1);
  p.dissipation = quadratic_dissipation(nu);
  p.u0 = {u0};
  return p;
}

}  // namespace

TEST_CASE("backward Euler reproduces the geometric decay exactly") {
  WideProblem p = scalar_flow(1.0, 1.0, 1.0, 10, 1.0);
  ReferenceSolution r = implicit_euler(p);
  CHECK(r.provenance == ReferenceKind::ImplicitEuler);
  CHECK_FALSE(r.analytic());
  // (nu/tau + lambda) u_i = (nu/tau) u_{i-1}  =>  u_i = (1.1)^{-i}.
  for (long i = 0; i <= 10; ++i) {
    const double expected = std::pow(1.1, -static_cast<double>(i));
    CHECK(r.trajectory.node(i)[0] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(r.trajectory.node(3)[0] ==
        doctest::Approx(0.751314800901578).epsilon(1e-12));
  // Discrete references interpolate linearly between their nodes.
  const double mid = 0.5 * (1.0 + 1.0 / 1.1);
  CHECK(r.at(0.05)[0] == doctest::Approx(mid).epsilon(1e-12));
}

TEST_CASE("backward Euler is causal: later forcing cannot move earlier nodes") {
  WideProblem a = scalar_flow(1.0, 1.0, 2.0, 40, 1.0);
  std::vector<double> fa(41, 0.0), fb(41, 0.0);
  for (long i = 21; i <= 40; ++i) fb[i] = 5.0;  // differs only after node 20
  WideProblem b = a;
  a.energy = with_forcing(a.energy, fa);
  b.energy = with_forcing(b.energy, fb);
  ReferenceSolution ra = implicit_euler(a);
  ReferenceSolution rb = implicit_euler(b);
  for (long i = 0; i <= 20; ++i) {
    CHECK(ra.trajectory.node(i)[0] == rb.trajectory.node(i)[0]);
  }
  bool moved = false;
  for (long i = 21; i <= 40; ++i) {
    moved = moved || ra.trajectory.node(i)[0] != rb.trajectory.node(i)[0];
  }
  CHECK(moved);
}

TEST_CASE("backward Euler rejects problems outside its contract") {
  WideProblem inertial = scalar_flow(1.0, 1.0, 1.0, 10, 1.0);
  inertial.rho = 1.0;
  inertial.u1 = std::vector<double>{0.0};
  CHECK_THROWS_AS(implicit_euler(inertial), InvalidParams);

  WideProblem powerlaw = scalar_flow(1.0, 1.0, 1.0, 10, 1.0);
  powerlaw.dissipation = power_dissipation(3.0, 1.0);
  CHECK_THROWS_AS(implicit_euler(powerlaw), InvalidParams);

  // lambda = -nu/tau makes every step system singular.
  WideProblem singular = scalar_flow(-10.0, 1.0, 1.0, 10, 1.0);
  CHECK_THROWS_AS(implicit_euler(singular), StepNewtonFailure);
}

TEST_CASE("incremental minimization matches backward Euler on smooth flows") {
  WideProblem p = scalar_flow(1.0, 1.0, 1.0, 50, 1.0);
  ReferenceSolution a = implicit_euler(p);
  ReferenceSolution b = incremental_minimization(p, p.grid.tau);
  CHECK(b.provenance == ReferenceKind::Incremental);
  REQUIRE(b.trajectory.grid.steps == 50);
  for (long i = 0; i <= 50; ++i) {
    CHECK(std::abs(a.trajectory.node(i)[0] - b.trajectory.node(i)[0]) <=
          1e-12);
  }
}

TEST_CASE("incremental threshold steps solve the ramp play exactly") {
  WideProblem p;
  p.grid = TimeGrid::make(2.0, 2000);
  std::vector<double> f(2001);
  for (long i = 0; i <= 2000; ++i) f[i] = p.grid.node(i);
  p.energy = with_forcing(quadratic_energy(1.0, 1), f);
  p.dissipation = one_homogeneous_dissipation(1.0);
  p.u0 = {0.0};
  p.quasistatic = true;
  ReferenceSolution r = incremental_minimization(p, 1e-3);
  REQUIRE(r.trajectory.grid.steps == 2000);
  double sup = 0.0;
  for (long i = 0; i <= 2000; ++i) {
    const double t = r.trajectory.grid.node(i);
    sup = std::max(sup, std::abs(r.trajectory.node(i)[0] -
                                 std::max(t - 1.0, 0.0)));
  }
  CHECK(sup <= 1e-12);
}

TEST_CASE("incremental minimization validates its step size") {
  WideProblem p = scalar_flow(1.0, 1.0, 1.0, 10, 1.0);
  CHECK_THROWS_AS(incremental_minimization(p, 0.0), InvalidParams);
  CHECK_THROWS_AS(incremental_minimization(p, -0.1), InvalidParams);
  CHECK_THROWS_AS(incremental_minimization(p, 0.9), TooFewSteps);
}

TEST_CASE("incremental multistep tracks the inertial oscillation") {
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 1000);
  p.energy = quadratic_energy(1.0, 1);
  p.dissipation = quadratic_dissipation(0.0);
  p.rho = 1.0;
  p.u0 = {1.0};
  p.u1 = std::vector<double>{0.0};
  ReferenceSolution r = incremental_minimization(p, 1e-3);
  double sup = 0.0;
  for (long i = 0; i <= 1000; ++i) {
    const double t = r.trajectory.grid.node(i);
    sup = std::max(sup, std::abs(r.trajectory.node(i)[0] - std::cos(t)));
  }
  CHECK(sup <= 0.1);
}

TEST_CASE("leapfrog integrates the cosine to second order") {
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 100);
  p.energy = quadratic_energy(1.0, 1);
  p.dissipation = quadratic_dissipation(0.0);
  p.rho = 1.0;
  p.u0 = {1.0};
  p.u1 = std::vector<double>{0.0};
  ReferenceSolution r = leapfrog_wave(p);
  CHECK(r.provenance == ReferenceKind::Leapfrog);
  double sup = 0.0;
  for (long i = 0; i <= 100; ++i)
    sup = std::max(sup,
                   std::abs(r.trajectory.node(i)[0] - std::cos(p.grid.node(i))));
  CHECK(sup <= 1e-4);
}

TEST_CASE("leapfrog enforces its contract and the mesh step bound") {
  WideProblem first_order = scalar_flow(1.0, 1.0, 1.0, 10, 1.0);
  CHECK_THROWS_AS(leapfrog_wave(first_order), InvalidParams);

  WideProblem powerlaw;
  powerlaw.grid = TimeGrid::make(1.0, 10);
  powerlaw.energy = quadratic_energy(1.0, 1);
  powerlaw.dissipation = power_dissipation(3.0, 1.0);
  powerlaw.rho = 1.0;
  powerlaw.u0 = {1.0};
  powerlaw.u1 = std::vector<double>{0.0};
  CHECK_THROWS_AS(leapfrog_wave(powerlaw), InvalidParams);

  WideProblem unstable;
  unstable.grid = TimeGrid::make(1.0, 100);  // tau = 0.01
  unstable.energy = quadratic_energy(1.0, 1);
  unstable.dissipation = quadratic_dissipation(0.0);
  unstable.rho = 1.0;
  unstable.u0 = {1.0};
  unstable.u1 = std::vector<double>{0.0};
  unstable.spatial_h = 0.001;  // needs tau <= 0.0005
  CHECK_THROWS_AS(leapfrog_wave(unstable), StabilityViolation);
}

TEST_CASE("quasistatic solve inverts the forcing node by node") {
  TimeGrid g = TimeGrid::make(1.0, 10);
  std::vector<double> f(11);
  for (long i = 0; i <= 10; ++i) f[i] = g.node(i);

  // Identity energy: minimizer of u^2/2 - t u is u = t.
  ReferenceSolution lin = solve_quasistatic(with_forcing(quadratic_energy(1.0, 1), f), g);
  for (long i = 0; i <= 10; ++i)
    CHECK(lin.trajectory.node(i)[0] ==
          doctest::Approx(g.node(i)).epsilon(1e-12));

  // Quartic energy: u^3 = t, so u = t^(1/3).
  ReferenceSolution quart = solve_quasistatic(with_forcing(power_energy(4.0), f), g);
  double sup = 0.0;
  for (long i = 0; i <= 10; ++i)
    sup = std::max(sup,
                   std::abs(quart.trajectory.node(i)[0] - std::cbrt(g.node(i))));
  CHECK(sup <= 1e-9);
}

TEST_CASE("catalogue decay and oscillation entries evaluate in closed form") {
  AnalyticSpec d;
  d.name = "exp_decay";
  d.lambda = 2.0;
  d.u0 = {3.0};
  ReferenceSolution rd = analytic_catalogue(d);
  CHECK(rd.analytic());
  CHECK(rd.at(0.7)[0] == doctest::Approx(3.0 * std::exp(-1.4)).epsilon(1e-14));

  AnalyticSpec h;
  h.name = "harmonic";
  h.rho = 4.0;
  h.lambda = 1.0;
  h.u0 = {1.0};
  h.u1 = {2.0};
  ReferenceSolution rh = analytic_catalogue(h);
  const double w = 0.5;  // sqrt(lambda/rho)
  CHECK(rh.at(1.0)[0] ==
        doctest::Approx(std::cos(w) + (2.0 / w) * std::sin(w)).epsilon(1e-14));

  AnalyticSpec s;
  s.name = "selection_t2";
  ReferenceSolution rs = analytic_catalogue(s);
  CHECK(rs.at(0.6)[0] == doctest::Approx(0.36).epsilon(1e-14));

  AnalyticSpec pl;
  pl.name = "play";
  pl.alpha = 1.0;
  ReferenceSolution rp = analytic_catalogue(pl);
  CHECK(rp.at(0.5)[0] == 0.0);
  CHECK(rp.at(1.75)[0] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("catalogue mode entries carry the discrete mesh eigenvalue") {
  const int M = 7, k = 2;
  const double h = 1.0 / (M + 1);
  const double mu = (2.0 / (h * h)) * (1.0 - std::cos(k * M_PI * h));

  AnalyticSpec heat;
  heat.name = "heat_mode";
  heat.mode_k = k;
  heat.mesh_points = M;
  ReferenceSolution rh = analytic_catalogue(heat);
  std::vector<double> v0 = rh.at(0.0), v1 = rh.at(0.1);
  REQUIRE(v0.size() == static_cast<size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double x = (j + 1) * h;
    CHECK(v0[j] == doctest::Approx(std::sin(k * M_PI * x)).epsilon(1e-13));
    CHECK(v1[j] ==
          doctest::Approx(std::exp(-mu * 0.1) * v0[j]).epsilon(1e-12));
  }

  AnalyticSpec wave;
  wave.name = "wave_mode";
  wave.mode_k = 1;
  wave.mesh_points = M;
  ReferenceSolution rw = analytic_catalogue(wave);
  const double mu1 = (2.0 / (h * h)) * (1.0 - std::cos(M_PI * h));
  std::vector<double> w0 = rw.at(0.0), w1 = rw.at(0.3);
  for (int j = 0; j < M; ++j) {
    CHECK(w1[j] == doctest::Approx(std::cos(std::sqrt(mu1) * 0.3) * w0[j])
                       .epsilon(1e-12));
  }
}

TEST_CASE("boundary-value entry satisfies its differential equation") {
  AnalyticSpec s;
  s.name = "wide_linear_bvp";
  s.lambda = 1.0;
  s.nu = 1.0;
  s.epsilon = 0.1;
  s.horizon = 1.0;
  s.u0 = {1.0};
  ReferenceSolution r = analytic_catalogue(s);
  CHECK(r.at(0.0)[0] == doctest::Approx(1.0).epsilon(1e-13));
  // -eps nu u'' + nu u' + lambda u = 0, checked by central differences.
  const double h = 1e-5;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double um = r.at(t - h)[0], u0 = r.at(t)[0], up = r.at(t + h)[0];
    const double res = -s.epsilon * s.nu * (up - 2.0 * u0 + um) / (h * h) +
                       s.nu * (up - um) / (2.0 * h) + s.lambda * u0;
    CHECK(std::abs(res) <= 1e-6);
  }
  // Natural end condition u'(T) = 0.
  CHECK(std::abs(wide_linear_bvp_derivative(s, s.horizon)) <= 1e-12);

  // Vanishing epsilon recovers the causal decay.
  AnalyticSpec fine = s;
  fine.epsilon = 1e-4;
  ReferenceSolution rf = analytic_catalogue(fine);
  CHECK(std::abs(rf.at(0.5)[0] - std::exp(-0.5)) <= 1e-3);
}

TEST_CASE("catalogue rejects malformed requests") {
  AnalyticSpec bogus;
  bogus.name = "does_not_exist";
  CHECK_THROWS_AS(analytic_catalogue(bogus), UnknownEntry);

  AnalyticSpec nomesh;
  nomesh.name = "heat_mode";
  nomesh.mesh_points = 0;
  CHECK_THROWS_AS(analytic_catalogue(nomesh), GridTooShort);

  AnalyticSpec highmode;
  highmode.name = "heat_mode";
  highmode.mesh_points = 7;
  highmode.mode_k = 8;
  CHECK_THROWS_AS(analytic_catalogue(highmode), ModeOutOfRange);

  AnalyticSpec inertialess;
  inertialess.name = "harmonic";
  inertialess.rho = 0.0;
  CHECK_THROWS_AS(analytic_catalogue(inertialess), InvalidParams);

  AnalyticSpec noeps;
  noeps.name = "wide_linear_bvp";
  noeps.epsilon = 0.0;
  CHECK_THROWS_AS(analytic_catalogue(noeps), NonPositiveEpsilon);
}
