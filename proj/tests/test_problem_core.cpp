#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <vector>

#include "wide/banded.hpp"
#include "wide/csv.hpp"
#include "wide/dissipation.hpp"
#include "wide/energy.hpp"
#include "wide/errors.hpp"
#include "wide/grid.hpp"
#include "wide/parallel.hpp"
#include "wide/problem.hpp"
#include "wide/weights.hpp"

using namespace wide;

TEST_CASE("time grid derives tau and validates inputs") {
  TimeGrid g = TimeGrid::make(1.0, 4);
  CHECK(g.tau == 0.25);
  CHECK(g.node(2) == 0.5);
  CHECK(g.node(0) == 0.0);
  CHECK_THROWS_AS(TimeGrid::make(0.0, 4), NonPositiveHorizon);
  CHECK_THROWS_AS(TimeGrid::make(-1.0, 4), NonPositiveHorizon);
  CHECK_THROWS_AS(TimeGrid::make(1.0, 1), TooFewSteps);
}

TEST_CASE("trajectory storage is flat row-major with node views") {
  TimeGrid g = TimeGrid::make(1.0, 3);
  Trajectory u = Trajectory::zeros(g, 2);
  CHECK(u.nodes() == 4);
  CHECK(u.values.size() == 8);
  u.node(2)[1] = 7.0;
  CHECK(u.values[5] == 7.0);
  CHECK_THROWS_AS(Trajectory::zeros(g, 0), ShapeMismatch);
}

TEST_CASE("geometric weights halve per step when tau equals epsilon") {
  TimeGrid g = TimeGrid::make(0.3, 3);  // tau = 0.1
  WeightScheme w = make_weights(0.1, g);
  CHECK(w.kappa == 0.5);
  CHECK(w.eps_hat == doctest::Approx(0.2));
  REQUIRE(w.e.size() == 4);
  CHECK(w.e[0] == 1.0);
  CHECK(w.e[1] == 0.5);
  CHECK(w.e[2] == 0.25);
  CHECK(w.e[3] == 0.125);
  CHECK(w.c_eps == w.kappa);
  CHECK(w.dropped_prefactor() == doctest::Approx(0.01));
  CHECK_THROWS_AS(make_weights(0.0, g), NonPositiveEpsilon);
  CHECK_THROWS_AS(make_weights(-0.1, g), NonPositiveEpsilon);
}

TEST_CASE("problem-derived weights use unit energy factor with inertia") {
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 10);
  p.energy = quadratic_energy(1.0);
  p.dissipation = quadratic_dissipation(1.0);
  p.rho = 0.0;
  p.u0 = {1.0};
  CHECK(weights_for(p, 0.1).c_eps == weights_for(p, 0.1).kappa);
  p.rho = 1.0;
  p.u1 = std::vector<double>{0.0};
  CHECK(weights_for(p, 0.1).c_eps == 1.0);
  CHECK_THROWS_AS(
      make_weights_with_factor(0.1, p.grid, 0.7), InvalidParams);
}

TEST_CASE("quadratic energy exposes exact value gradient and matrix") {
  EnergyModel e = quadratic_energy(2.0, 3);
  std::vector<double> u = {1.0, -2.0, 0.5};
  CHECK(e.value(u) == doctest::Approx(0.5 * 2.0 * (1 + 4 + 0.25)));
  std::vector<double> g(3);
  e.gradient(u, g);
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(-4.0));
  CHECK(g[2] == doctest::Approx(1.0));
  REQUIRE(e.is_quadratic());
  CHECK(e.quadratic_matrix[0] == 2.0);
  CHECK(e.quadratic_matrix[1] == 0.0);
  CHECK(e.lambda_convexity == doctest::Approx(2.0));
  REQUIRE(e.has_hessian());
  std::vector<double> h(9);
  e.hessian(u, h);
  CHECK(h[0] == doctest::Approx(2.0));
  CHECK(h[4] == doctest::Approx(2.0));
  CHECK(h[1] == 0.0);
}

TEST_CASE("matrix quadratic energy validates symmetry and size") {
  std::vector<double> sym = {2.0, -1.0, -1.0, 2.0};
  EnergyModel e = quadratic_energy_matrix(sym, 2);
  std::vector<double> u = {1.0, 1.0};
  CHECK(e.value(u) == doctest::Approx(1.0));  // 0.5*(2-1-1+2)
  // Gershgorin bound: diag - offdiag sum = 2 - 1 = 1
  CHECK(e.lambda_convexity == doctest::Approx(1.0));
  std::vector<double> asym = {2.0, -1.0, 0.5, 2.0};
  CHECK_THROWS_AS(quadratic_energy_matrix(asym, 2), InvalidParams);
  std::vector<double> wrong = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(quadratic_energy_matrix(wrong, 2), ShapeMismatch);
}

TEST_CASE("square-root selection energy has the stated ramp values") {
  EnergyModel e = sqrt_selection_energy();
  std::vector<double> u = {4.0};
  CHECK(e.value(u) == doctest::Approx(-32.0 / 3.0));
  std::vector<double> g(1);
  e.gradient(u, g);
  CHECK(g[0] == doctest::Approx(-4.0));
  u[0] = -1.0;
  CHECK(e.value(u) == 0.0);
  e.gradient(u, g);
  CHECK(g[0] == 0.0);
  CHECK(e.lambda_convexity == -std::numeric_limits<double>::infinity());
}

TEST_CASE("power and double-well energies match hand values") {
  EnergyModel p4 = power_energy(4.0);
  std::vector<double> u = {2.0};
  CHECK(p4.value(u) == doctest::Approx(4.0));
  std::vector<double> g(1);
  p4.gradient(u, g);
  CHECK(g[0] == doctest::Approx(8.0));
  CHECK_THROWS_AS(power_energy(1.0), InvalidParams);

  EnergyModel dw = double_well_energy(1);
  u[0] = 1.0;
  CHECK(dw.value(u) == 0.0);
  u[0] = 0.0;
  CHECK(dw.value(u) == doctest::Approx(0.25));
  u[0] = 2.0;
  dw.gradient(u, g);
  CHECK(g[0] == doctest::Approx(6.0));
  CHECK(dw.lambda_convexity == doctest::Approx(-1.0));
}

TEST_CASE("energy dispatcher rejects unknown names") {
  CHECK_THROWS_AS(builtin_energy("no_such_energy", {}), UnknownEnergy);
  EnergyModel e = builtin_energy("quadratic", {{"lambda", 3.0}});
  std::vector<double> u = {1.0};
  CHECK(e.value(u) == doctest::Approx(1.5));
}

TEST_CASE("forcing attachment stores one vector per node") {
  EnergyModel e = with_forcing(quadratic_energy(1.0), {0.0, 1.0, 2.0});
  REQUIRE(e.has_forcing());
  CHECK(e.forcing_at(2)[0] == 2.0);
  CHECK(!quadratic_energy(1.0).has_forcing());
}

TEST_CASE("dissipation densities and derivatives match closed forms") {
  DissipationModel q = quadratic_dissipation(2.0);
  std::vector<double> v = {3.0};
  CHECK(q.value(v) == doctest::Approx(9.0));
  std::vector<double> d(1);
  q.deriv(v, d);
  CHECK(d[0] == doctest::Approx(6.0));
  CHECK(q.curvature(5.0) == doctest::Approx(2.0));

  DissipationModel pw = power_dissipation(3.0, 2.0);
  CHECK(pw.value(v) == doctest::Approx(18.0));  // (2/3)*27
  pw.deriv(v, d);
  CHECK(d[0] == doctest::Approx(18.0));  // 2*|3|^2*sign
  v[0] = -3.0;
  pw.deriv(v, d);
  CHECK(d[0] == doctest::Approx(-18.0));
  CHECK(pw.curvature(3.0) == doctest::Approx(12.0));  // 2*2*3

  DissipationModel oh = one_homogeneous_dissipation(1.5);
  v[0] = -2.0;
  CHECK(oh.value(v) == doctest::Approx(3.0));
  CHECK_THROWS_AS(oh.deriv(v, d), NonSmoothDissipation);
}

TEST_CASE("dissipation factories reject invalid parameters") {
  CHECK_THROWS_AS(quadratic_dissipation(-1.0), UnknownDissipation);
  CHECK_THROWS_AS(power_dissipation(1.0, 1.0), InvalidGrowth);
  CHECK_THROWS_AS(power_dissipation(0.5, 1.0), InvalidGrowth);
  CHECK_THROWS_AS(power_dissipation(3.0, 0.0), UnknownDissipation);
  CHECK_THROWS_AS(one_homogeneous_dissipation(0.0), UnknownDissipation);
}

TEST_CASE("proximal map satisfies its own optimality condition") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    double s = 0.1 + 0.5 * std::abs(unif(rng));
    std::vector<double> v = {unif(rng)}, w(1), dw(1);
    DissipationModel q = quadratic_dissipation(1.7);
    q.prox(v, s, w);
    q.deriv(w, dw);
    CHECK(std::abs(w[0] + s * dw[0] - v[0]) < 1e-12);

    DissipationModel pw = power_dissipation(3.0, 0.8);
    pw.prox(v, s, w);
    pw.deriv(w, dw);
    CHECK(std::abs(w[0] + s * dw[0] - v[0]) < 1e-9 * (1.0 + std::abs(v[0])));
  }
}

TEST_CASE("one-homogeneous prox is the soft threshold") {
  DissipationModel oh = one_homogeneous_dissipation(2.0);
  std::vector<double> v = {5.0, -5.0, 0.5}, w(3);
  oh.prox(v, 1.0, w);  // threshold s*alpha = 2
  CHECK(w[0] == doctest::Approx(3.0));
  CHECK(w[1] == doctest::Approx(-3.0));
  CHECK(w[2] == 0.0);
}

TEST_CASE("problem validation rejects inconsistent specifications") {
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 4);
  p.energy = quadratic_energy(1.0, 2);
  p.dissipation = quadratic_dissipation(1.0);
  p.u0 = {1.0};  // wrong length for dim 2
  CHECK_THROWS_AS(p.validate(), ShapeMismatch);
  p.u0 = {1.0, 0.0};
  CHECK_NOTHROW(p.validate());

  p.rho = 1.0;
  CHECK_THROWS_AS(p.validate(), MissingInitialRate);
  p.u1 = std::vector<double>{0.0};
  CHECK_THROWS_AS(p.validate(), ShapeMismatch);  // rate length mismatch
  p.u1 = std::vector<double>{0.0, 0.0};
  CHECK_NOTHROW(p.validate());

  p.rho = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParams);
  p.rho = 0.0;
  p.u1.reset();

  p.dissipation = quadratic_dissipation(0.0);
  CHECK_THROWS_AS(p.validate(), UnsupportedCombination);
  p.quasistatic = true;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("constrained trajectory seeds initial data and rate") {
  WideProblem p;
  p.grid = TimeGrid::make(1.0, 4);
  p.energy = quadratic_energy(1.0);
  p.dissipation = quadratic_dissipation(1.0);
  p.u0 = {3.0};
  CHECK(p.first_free() == 1);
  CHECK(p.free_nodes() == 4);
  Trajectory flat = p.constrained_trajectory();
  for (long i = 0; i <= 4; ++i) CHECK(flat.node(i)[0] == 3.0);

  p.rho = 2.0;
  p.u1 = std::vector<double>{4.0};
  CHECK(p.first_free() == 2);
  Trajectory seeded = p.constrained_trajectory();
  CHECK(seeded.node(0)[0] == 3.0);
  CHECK(seeded.node(1)[0] == doctest::Approx(3.0 + 0.25 * 4.0));
}

TEST_CASE("banded storage addresses entries like the dense matrix") {
  BandedMatrix A = BandedMatrix::zeros(5, 1, 2);
  A.at(2, 3) = 7.0;
  A.at(3, 2) = -1.0;
  CHECK(A.get(2, 3) == 7.0);
  CHECK(A.get(3, 2) == -1.0);
  CHECK(A.get(4, 0) == 0.0);  // out of band
  CHECK(A.in_band(0, 2));
  CHECK(!A.in_band(0, 3));
  CHECK(!A.in_band(2, 0));
}

TEST_CASE("banded apply and solve agree with dense arithmetic") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const long n = 12;
  BandedMatrix A = BandedMatrix::zeros(n, 2, 1);
  std::vector<double> dense(n * n, 0.0);
  for (long i = 0; i < n; ++i) {
    for (long j = std::max(0L, i - 2); j <= std::min(n - 1, i + 1); ++j) {
      double val = unif(rng);
      if (i == j) val += 4.0;  // diagonally dominant
      A.at(i, j) = val;
      dense[i * n + j] = val;
    }
  }
  std::vector<double> x(n), y(n), yd(n);
  for (long i = 0; i < n; ++i) x[i] = unif(rng);
  A.apply(x.data(), y.data());
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    for (long j = 0; j < n; ++j) s += dense[i * n + j] * x[j];
    yd[i] = s;
  }
  for (long i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(yd[i]));

  // Solve A z = y and verify it reproduces x.
  std::vector<double> z = y;
  A.solve_in_place(z);
  for (long i = 0; i < n; ++i)
    CHECK(z[i] == doctest::Approx(x[i]).epsilon(1e-10));
}

TEST_CASE("singular banded systems are reported, not silently returned") {
  BandedMatrix A = BandedMatrix::zeros(3, 1, 1);  // all zeros
  std::vector<double> b = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(A.solve_in_place(b), SingularSystem);
  BandedMatrix B = BandedMatrix::zeros(3, 1, 1);
  std::vector<double> wrong = {1.0, 2.0};
  CHECK_THROWS_AS(B.solve_in_place(wrong), ShapeMismatch);
}

TEST_CASE("tridiagonal elimination matches the banded factorization") {
  const long n = 40;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> sub(n - 1), diag(n), sup(n - 1), rhs(n);
  BandedMatrix A = BandedMatrix::zeros(n, 1, 1);
  for (long i = 0; i < n; ++i) {
    diag[i] = 4.0 + unif(rng);
    rhs[i] = unif(rng);
    A.at(i, i) = diag[i];
    if (i > 0) {
      sub[i - 1] = unif(rng);
      A.at(i, i - 1) = sub[i - 1];
    }
    if (i + 1 < n) {
      sup[i] = unif(rng);
      A.at(i, i + 1) = sup[i];
    }
  }
  std::vector<double> lapack_x = rhs;
  A.solve_in_place(lapack_x);
  thomas_solve(sub, diag, sup, rhs);
  for (long i = 0; i < n; ++i)
    CHECK(rhs[i] == doctest::Approx(lapack_x[i]).epsilon(1e-10));
}

TEST_CASE("tridiagonal zero pivot is reported") {
  std::vector<double> sub = {0.0}, diag = {0.0, 1.0}, sup = {0.0},
                      rhs = {1.0, 1.0};
  CHECK_THROWS_AS(thomas_solve(sub, diag, sup, rhs), SingularSystem);
}

TEST_CASE("table round-trip preserves every bit of every cell") {
  Table t;
  t.header = {"a", "b"};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int r = 0; r < 10; ++r) {
    t.rows.push_back({unif(rng) * 1e-7, unif(rng) * 1e12});
  }
  t.rows.push_back({1.0 / 3.0, 0.1});
  const std::string path = "roundtrip_test.csv";
  emit_table(t, path);
  Table back = read_table(path);
  REQUIRE(back.header == t.header);
  REQUIRE(back.rows.size() == t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    for (size_t c = 0; c < 2; ++c) {
      CHECK(back.rows[r][c] == t.rows[r][c]);  // bitwise
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("table writing validates shape and destination") {
  Table t;
  t.header = {"a", "b"};
  t.rows.push_back({1.0});
  CHECK_THROWS_AS(emit_table(t, "bad_shape.csv"), ShapeMismatch);
  t.rows[0] = {1.0, 2.0};
  CHECK_THROWS_AS(emit_table(t, "/no/such/dir/file.csv"), IoError);
  CHECK_THROWS_AS(read_table("/no/such/file.csv"), IoError);
}

TEST_CASE("parallel chunked sum is bitwise identical to the serial kernel") {
  const std::size_t n = 100000;
  std::vector<double> data(n);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (auto& x : data) x = unif(rng);
  auto f = [&](std::size_t i) { return data[i] * data[i] - 0.25 * data[i]; };
  double serial_total = serial::chunked_sum(n, f);
  double parallel_total = chunked_sum(n, f);
  CHECK(serial_total == parallel_total);  // bitwise
  CHECK(num_workers() >= 1);
}
