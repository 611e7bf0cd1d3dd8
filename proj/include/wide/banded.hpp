#pragma once

#include <vector>

namespace wide {

// General banded matrix in LAPACK band storage (column-major, leading
// dimension 2*kl+ku+1 so the factorization can hold fill-in in place).
// Entry (i, j) with |i-j| within band lives at ab[j*ldab + kl+ku+i-j].
struct BandedMatrix {
  long n = 0;
  int kl = 0;
  int ku = 0;
  std::vector<double> ab;

  static BandedMatrix zeros(long n, int kl, int ku);

  int ldab() const { return 2 * kl + ku + 1; }
  double& at(long i, long j) {
    return ab[static_cast<size_t>(j) * ldab() + (kl + ku + i - j)];
  }
  double get(long i, long j) const {
    if (j - i > ku || i - j > kl) return 0.0;
    return ab[static_cast<size_t>(j) * ldab() + (kl + ku + i - j)];
  }
  bool in_band(long i, long j) const { return j - i <= ku && i - j <= kl; }

  // y = A x.
  void apply(const double* x, double* y) const;

  // Solves A x = b in place (b overwritten by x) via LAPACK dgbsv; the
  // matrix is factorized in place. Throws SingularSystem on exact breakdown.
  void solve_in_place(std::vector<double>& b);
};

// Tridiagonal system solved by the Thomas algorithm (no pivoting; intended
// for the diagonally dominant systems this library produces). Streaming
// variant for very long grids lives in minimize.cpp.
void thomas_solve(std::vector<double>& sub, std::vector<double>& diag,
                  std::vector<double>& sup, std::vector<double>& rhs);

// Assembled linear system A u = b over free nodes with constrained nodes
// eliminated into b.
struct BandedSystem {
  BandedMatrix A;
  std::vector<double> b;
  int dim = 1;

  // Convenience views of the scalar tridiagonal case.
  double entry(long i, long j) const { return A.get(i, j); }
};

}  // namespace wide
