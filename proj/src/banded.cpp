#include "wide/banded.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

#include "wide/errors.hpp"

namespace wide {

BandedMatrix BandedMatrix::zeros(long n, int kl, int ku) {
  BandedMatrix m;
  m.n = n;
  m.kl = kl;
  m.ku = ku;
  m.ab.assign(static_cast<size_t>(n) * (2 * kl + ku + 1), 0.0);
  return m;
}

void BandedMatrix::apply(const double* x, double* y) const {
  for (long i = 0; i < n; ++i) y[i] = 0.0;
  for (long j = 0; j < n; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const long lo = j - ku < 0 ? 0 : j - ku;
    const long hi = j + kl >= n ? n - 1 : j + kl;
    for (long i = lo; i <= hi; ++i) {
      y[i] += get(i, j) * xj;
    }
  }
}

void BandedMatrix::solve_in_place(std::vector<double>& b) {
  if (b.size() != static_cast<size_t>(n)) {
    throw ShapeMismatch("right-hand side length mismatch");
  }
  std::vector<lapack_int> ipiv(static_cast<size_t>(n));
  const lapack_int info = LAPACKE_dgbsv(
      LAPACK_COL_MAJOR, static_cast<lapack_int>(n), kl, ku, 1, ab.data(),
      ldab(), ipiv.data(), b.data(), static_cast<lapack_int>(n));
  if (info != 0) {
    throw SingularSystem("banded solve failed with pivot info " +
                         std::to_string(info));
  }
}

void thomas_solve(std::vector<double>& sub, std::vector<double>& diag,
                  std::vector<double>& sup, std::vector<double>& rhs) {
  const size_t n = diag.size();
  if (sub.size() + 1 != n || sup.size() + 1 != n || rhs.size() != n) {
    throw ShapeMismatch("tridiagonal shapes inconsistent");
  }
  double denom = diag[0];
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw SingularSystem("zero pivot in tridiagonal solve");
  }
  if (n > 1) sup[0] /= denom;
  rhs[0] /= denom;
  for (size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i - 1] * sup[i - 1];
    if (denom == 0.0 || !std::isfinite(denom)) {
      throw SingularSystem("zero pivot in tridiagonal solve");
    }
    if (i < n - 1) sup[i] /= denom;
    rhs[i] = (rhs[i] - sub[i - 1] * rhs[i - 1]) / denom;
  }
  for (size_t i = n - 1; i-- > 0;) {
    rhs[i] -= sup[i] * rhs[i + 1];
  }
}

}  // namespace wide
