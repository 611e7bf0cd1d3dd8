#pragma once

#include <cstddef>
#include <vector>

namespace wide {

// Worker count: WIDE_NUM_WORKERS when set (>= 1), else the OpenMP default.
int num_workers();

inline constexpr std::size_t kSumChunk = 4096;

namespace serial {
// Reference kernels kept for testing; benchmarked against the parallel
// variants by the bench_kernels tool. Same chunked association as the
// parallel path so the two agree bitwise.
template <class F>
double chunked_sum(std::size_t n, F&& f) {
  double total = 0.0;
  for (std::size_t c0 = 0; c0 < n; c0 += kSumChunk) {
    const std::size_t c1 = c0 + kSumChunk < n ? c0 + kSumChunk : n;
    double part = 0.0;
    for (std::size_t i = c0; i < c1; ++i) part += f(i);
    total += part;
  }
  return total;
}

template <class F>
void for_each_index(std::size_t n, F&& f) {
  for (std::size_t i = 0; i < n; ++i) f(i);
}
}  // namespace serial

// Deterministic parallel reduction: fixed-size chunks are summed in
// parallel and combined in chunk order, so the result is bitwise identical
// for every worker count (and to the serial reference).
template <class F>
double chunked_sum(std::size_t n, F&& f) {
  if (n < 4 * kSumChunk) return serial::chunked_sum(n, f);
  const std::size_t chunks = (n + kSumChunk - 1) / kSumChunk;
  std::vector<double> partial(chunks);
#pragma omp parallel for schedule(static) num_threads(num_workers())
  for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
    const std::size_t c0 = static_cast<std::size_t>(c) * kSumChunk;
    const std::size_t c1 = c0 + kSumChunk < n ? c0 + kSumChunk : n;
    double part = 0.0;
    for (std::size_t i = c0; i < c1; ++i) part += f(i);
    partial[static_cast<std::size_t>(c)] = part;
  }
  double total = 0.0;
  for (double part : partial) total += part;
  return total;
}

template <class F>
void parallel_for(std::size_t n, F&& f) {
  if (n < 2 * kSumChunk) {
    serial::for_each_index(n, f);
    return;
  }
#pragma omp parallel for schedule(static) num_threads(num_workers())
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    f(static_cast<std::size_t>(i));
  }
}

}  // namespace wide
