#pragma once
// Dense integer matrices (GMP entries) with the lattice normal forms used by
// the ideal arithmetic and class-group code: upper-triangular column HNF,
// Smith normal form with left transform, determinants, membership tests.

#include <cstddef>
#include <vector>

#include <gmpxx.h>

namespace hasse {

struct MatZ {
  std::size_t rows = 0, cols = 0;
  std::vector<mpz_class> a;  // row-major

  MatZ() = default;
  MatZ(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  static MatZ identity(std::size_t n) {
    MatZ m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  mpz_class& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const mpz_class& at(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }

  bool operator==(const MatZ& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

// Hermite normal form of the lattice spanned by the COLUMNS of gens
// (dimension = gens.rows).  The lattice must have full rank.  Returns a
// square upper-triangular matrix with positive diagonal and entries right of
// the diagonal reduced into [0, diag).  If mod != 0 the lattice is assumed
// to contain mod * Z^rows (the generators are augmented accordingly and
// entries are kept reduced mod `mod` during elimination).
MatZ hnf_upper(const MatZ& gens, const mpz_class& mod = 0);

// Product of the diagonal (determinant of an upper-triangular HNF).
mpz_class diag_product(const MatZ& h);

// Is v in the lattice with upper-triangular column basis h?
bool hnf_contains(const MatZ& h, const std::vector<mpz_class>& v);

// Write v in the column basis h (v must be in the lattice).
std::vector<mpz_class> hnf_solve(const MatZ& h, const std::vector<mpz_class>& v);

// Smith normal form of a (rows x cols) matrix: returns the diagonal
// d_1 | d_2 | ... (nonnegative, length min(rows, cols)) and, if left != null,
// the unimodular U with (U * A * V) diagonal for some unimodular V.
std::vector<mpz_class> smith_normal_form(MatZ a, MatZ* left = nullptr);

std::vector<mpz_class> mat_vec(const MatZ& m, const std::vector<mpz_class>& v);

// Exact signed determinant (fraction-free Bareiss elimination).
mpz_class det_bareiss(MatZ m);

}  // namespace hasse
