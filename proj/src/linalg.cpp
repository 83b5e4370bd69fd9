#include "hasse/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace hasse {

namespace {

void mod_reduce(mpz_class& x, const mpz_class& mod) {
  if (mod != 0) {
    x %= mod;
    if (x < 0) x += mod;
  }
}

}  // namespace

MatZ hnf_upper(const MatZ& gens, const mpz_class& mod) {
  const std::size_t n = gens.rows;
  std::size_t ncols = gens.cols + (mod != 0 ? n : 0);
  // work columns
  std::vector<std::vector<mpz_class>> col(ncols, std::vector<mpz_class>(n));
  for (std::size_t j = 0; j < gens.cols; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      col[j][i] = gens.at(i, j);
      mod_reduce(col[j][i], mod);
    }
  if (mod != 0)
    for (std::size_t i = 0; i < n; ++i) col[gens.cols + i][i] = mod;

  std::vector<int> is_pivot(ncols, 0);
  std::vector<std::size_t> pivot_of_row(n);
  // eliminate bottom row upward
  for (std::size_t ri = n; ri-- > 0;) {
    // gcd-combine row ri across active (non-pivot) columns
    while (true) {
      std::size_t best = ncols;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (is_pivot[j] || col[j][ri] == 0) continue;
        if (best == ncols ||
            cmp(abs(col[j][ri]), abs(col[best][ri])) < 0)
          best = j;
      }
      if (best == ncols)
        throw std::runtime_error("hnf_upper: rank deficient lattice");
      bool done = true;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (j == best || is_pivot[j] || col[j][ri] == 0) continue;
        mpz_class q = col[j][ri] / col[best][ri];  // truncated ok
        if (q != 0)
          for (std::size_t i = 0; i <= ri; ++i) {
            col[j][i] -= q * col[best][i];
            mod_reduce(col[j][i], mod);
          }
        if (col[j][ri] != 0) done = false;
      }
      if (done) {
        // exactly one nonzero left in this row among active columns
        if (col[best][ri] < 0)
          for (std::size_t i = 0; i <= ri; ++i) col[best][i] = -col[best][i];
        is_pivot[best] = 1;
        pivot_of_row[ri] = best;
        break;
      }
    }
  }

  MatZ h(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) h.at(i, j) = col[pivot_of_row[j]][i];
  // reduce entries right of each diagonal
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j; i-- > 0;) {
      mpz_class q;
      mpz_fdiv_q(q.get_mpz_t(), h.at(i, j).get_mpz_t(),
                 h.at(i, i).get_mpz_t());
      if (q != 0)
        for (std::size_t k = 0; k <= i; ++k) h.at(k, j) -= q * h.at(k, i);
    }
  return h;
}

mpz_class diag_product(const MatZ& h) {
  mpz_class d = 1;
  for (std::size_t i = 0; i < h.rows; ++i) d *= h.at(i, i);
  return d;
}

bool hnf_contains(const MatZ& h, const std::vector<mpz_class>& v) {
  std::vector<mpz_class> w = v;
  for (std::size_t i = h.rows; i-- > 0;) {
    if (w[i] % h.at(i, i) != 0) return false;
    mpz_class t = w[i] / h.at(i, i);
    if (t != 0)
      for (std::size_t k = 0; k <= i; ++k) w[k] -= t * h.at(k, i);
  }
  return true;
}

std::vector<mpz_class> hnf_solve(const MatZ& h,
                                 const std::vector<mpz_class>& v) {
  std::vector<mpz_class> w = v, x(h.rows);
  for (std::size_t i = h.rows; i-- > 0;) {
    if (w[i] % h.at(i, i) != 0)
      throw std::runtime_error("hnf_solve: vector not in lattice");
    x[i] = w[i] / h.at(i, i);
    if (x[i] != 0)
      for (std::size_t k = 0; k <= i; ++k) w[k] -= x[i] * h.at(k, i);
  }
  return x;
}

std::vector<mpz_class> smith_normal_form(MatZ a, MatZ* left) {
  const std::size_t m = a.rows, n = a.cols;
  MatZ u;
  if (left) u = MatZ::identity(m);

  auto row_sub = [&](std::size_t dst, std::size_t src, const mpz_class& q) {
    for (std::size_t j = 0; j < n; ++j) a.at(dst, j) -= q * a.at(src, j);
    if (left)
      for (std::size_t j = 0; j < m; ++j) u.at(dst, j) -= q * u.at(src, j);
  };
  auto row_swap = [&](std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < n; ++k) std::swap(a.at(i, k), a.at(j, k));
    if (left)
      for (std::size_t k = 0; k < m; ++k) std::swap(u.at(i, k), u.at(j, k));
  };
  auto col_sub = [&](std::size_t dst, std::size_t src, const mpz_class& q) {
    for (std::size_t i = 0; i < m; ++i) a.at(i, dst) -= q * a.at(i, src);
  };
  auto col_swap = [&](std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < m; ++k) std::swap(a.at(k, i), a.at(k, j));
  };

  const std::size_t r = std::min(m, n);
  for (std::size_t t = 0; t < r; ++t) {
    // find smallest nonzero entry in the remaining block
    std::size_t pi = m, pj = n;
    for (std::size_t i = t; i < m; ++i)
      for (std::size_t j = t; j < n; ++j)
        if (a.at(i, j) != 0 &&
            (pi == m || cmp(abs(a.at(i, j)), abs(a.at(pi, pj))) < 0)) {
          pi = i;
          pj = j;
        }
    if (pi == m) break;  // rest is zero
    if (pi != t) row_swap(pi, t);
    if (pj != t) col_swap(pj, t);

    bool again = true;
    while (again) {
      again = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (a.at(i, t) == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a.at(i, t).get_mpz_t(),
                   a.at(t, t).get_mpz_t());
        row_sub(i, t, q);
        if (a.at(i, t) != 0) {  // remainder smaller than pivot: swap up
          row_swap(i, t);
          again = true;
        }
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (a.at(t, j) == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a.at(t, j).get_mpz_t(),
                   a.at(t, t).get_mpz_t());
        col_sub(j, t, q);
        if (a.at(t, j) != 0) {
          col_swap(j, t);
          again = true;
        }
      }
    }
    if (a.at(t, t) < 0) {
      for (std::size_t j = t; j < n; ++j) a.at(t, j) = -a.at(t, j);
      if (left)
        for (std::size_t j = 0; j < m; ++j) u.at(t, j) = -u.at(t, j);
    }
  }

  // enforce divisibility chain d_t | d_{t+1}
  for (std::size_t t = 0; t + 1 < r; ++t) {
    for (std::size_t s = t + 1; s < r; ++s) {
      if (a.at(s, s) % a.at(t, t) == 0) continue;
      // fold a(s,s) into the pivot via gcd: add col s to col t, re-eliminate
      col_sub(t, s, -1);
      bool again = true;
      while (again) {
        again = false;
        if (a.at(s, t) != 0) {
          mpz_class q;
          mpz_fdiv_q(q.get_mpz_t(), a.at(s, t).get_mpz_t(),
                     a.at(t, t).get_mpz_t());
          row_sub(s, t, q);
          if (a.at(s, t) != 0) {
            row_swap(s, t);
            again = true;
            continue;
          }
        }
        if (a.at(t, s) != 0) {
          mpz_class q;
          mpz_fdiv_q(q.get_mpz_t(), a.at(t, s).get_mpz_t(),
                     a.at(t, t).get_mpz_t());
          col_sub(s, t, q);
          if (a.at(t, s) != 0) {
            col_swap(s, t);
            again = true;
          }
        }
      }
      if (a.at(t, t) < 0) {
        for (std::size_t j = t; j < n; ++j) a.at(t, j) = -a.at(t, j);
        if (left)
          for (std::size_t j = 0; j < m; ++j) u.at(t, j) = -u.at(t, j);
      }
      if (a.at(s, s) < 0) {
        for (std::size_t j = s; j < n; ++j) a.at(s, j) = -a.at(s, j);
        if (left)
          for (std::size_t j = 0; j < m; ++j) u.at(s, j) = -u.at(s, j);
      }
    }
  }

  std::vector<mpz_class> d(r);
  for (std::size_t t = 0; t < r; ++t) d[t] = a.at(t, t);
  if (left) *left = u;
  return d;
}

std::vector<mpz_class> mat_vec(const MatZ& m, const std::vector<mpz_class>& v) {
  std::vector<mpz_class> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    mpz_class s = 0;
    for (std::size_t j = 0; j < m.cols; ++j) s += m.at(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

mpz_class det_bareiss(MatZ m) {
  if (m.rows != m.cols) throw std::invalid_argument("det: square only");
  std::size_t n = m.rows;
  if (n == 0) return 1;
  mpz_class prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m.at(k, k) == 0) {
      std::size_t s = k + 1;
      while (s < n && m.at(s, k) == 0) ++s;
      if (s == n) return 0;
      for (std::size_t j = k; j < n; ++j) std::swap(m.at(k, j), m.at(s, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        mpz_class t = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
        mpz_divexact(m.at(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
    prev = m.at(k, k);
  }
  return sign * m.at(n - 1, n - 1);
}

}  // namespace hasse
