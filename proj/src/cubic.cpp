#include "hasse/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hasse/arith.hpp"
#include "hasse/lattice.hpp"

namespace hasse {

namespace {

using Vec3 = std::array<mpz_class, 3>;

std::vector<mpz_class> to_vec(const Vec3& x) { return {x[0], x[1], x[2]}; }

// ---- mpf transcendentals (gmp has none; short series suffice) ----

mpf_class f_ln2(unsigned long prec) {
  // ln 2 = 2 atanh(1/3) = 2 sum (1/3)^(2k+1) / (2k+1)
  mpf_class acc(0, prec), term(0, prec), pw(0, prec);
  pw = 1;
  pw /= 3;
  mpf_class eps(1, prec);
  mpf_div_2exp(eps.get_mpf_t(), eps.get_mpf_t(), prec + 16);
  for (unsigned long k = 0;; ++k) {
    term = pw / (2 * k + 1);
    acc += term;
    if (term < eps) break;
    pw /= 9;
  }
  return 2 * acc;
}

mpf_class f_exp(const mpf_class& t, unsigned long prec) {
  mpf_class ln2 = f_ln2(prec);
  mpf_class q(t / ln2, prec);
  mpf_class fl(0, prec);
  mpf_floor(fl.get_mpf_t(), q.get_mpf_t());
  long k = mpf_get_si(fl.get_mpf_t());
  mpf_class r(t - k * ln2, prec);  // in [0, ln 2)
  mpf_class acc(1, prec), term(1, prec);
  mpf_class eps(1, prec);
  mpf_div_2exp(eps.get_mpf_t(), eps.get_mpf_t(), prec + 16);
  for (unsigned long j = 1; j < 4 * prec; ++j) {
    term *= r;
    term /= j;
    acc += term;
    if (term < eps) break;
  }
  if (k >= 0)
    mpf_mul_2exp(acc.get_mpf_t(), acc.get_mpf_t(), (unsigned long)k);
  else
    mpf_div_2exp(acc.get_mpf_t(), acc.get_mpf_t(), (unsigned long)(-k));
  return acc;
}

mpf_class f_log(const mpf_class& x, unsigned long prec) {
  if (x <= 0) throw std::invalid_argument("f_log: nonpositive argument");
  long e2;
  (void)mpf_get_d_2exp(&e2, x.get_mpf_t());
  mpf_class m(0, prec);
  if (e2 >= 0)
    mpf_div_2exp(m.get_mpf_t(), x.get_mpf_t(), (unsigned long)e2);
  else
    mpf_mul_2exp(m.get_mpf_t(), x.get_mpf_t(), (unsigned long)(-e2));
  // m in [1/2, 1): ln m = 2 atanh(u), u = (m-1)/(m+1) in (-1/3, 0]
  mpf_class u((m - 1) / (m + 1), prec);
  mpf_class acc(0, prec), term(u, prec), u2(u * u, prec);
  mpf_class eps(1, prec);
  mpf_div_2exp(eps.get_mpf_t(), eps.get_mpf_t(), prec + 16);
  for (unsigned long k = 0;; ++k) {
    acc += term / (2 * k + 1);
    term *= u2;
    if (abs(term) < eps) break;
  }
  return e2 * f_ln2(prec) + 2 * acc;
}

// Real cube root of c by Newton iteration from a double seed.
mpf_class f_cbrt(const mpz_class& c, unsigned long prec) {
  mpf_class x(std::cbrt(c.get_d()), prec);
  mpf_class cf(0, prec);
  cf = c;
  for (int it = 0; it < 80; ++it) {
    mpf_class nx((2 * x + cf / (x * x)) / 3, prec);
    mpf_class diff(abs(nx - x), prec);
    x = nx;
    mpf_class tol(abs(x), prec);
    mpf_div_2exp(tol.get_mpf_t(), tol.get_mpf_t(), prec);
    if (diff <= tol * 4) break;
  }
  return x;
}

// ---- maximal-order construction helpers ----

// Multiplication of power-basis rational vectors modulo theta^3 = c.
std::array<mpq_class, 3> power_mul(const std::array<mpq_class, 3>& x,
                                   const std::array<mpq_class, 3>& y,
                                   const mpz_class& c) {
  std::array<mpq_class, 5> raw{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) raw[i + j] += x[i] * y[j];
  std::array<mpq_class, 3> z{raw[0], raw[1], raw[2]};
  z[0] += c * raw[3];
  z[1] += c * raw[4];
  return z;
}

// Is (x0 + x1 theta + x2 theta^2) / den an algebraic integer?  The monic
// characteristic polynomial of its multiplication matrix must have integer
// coefficients.
bool power_vec_integral(const Vec3& num, const mpz_class& den,
                        const mpz_class& c) {
  std::array<mpq_class, 3> q;
  for (int i = 0; i < 3; ++i) {
    q[i] = mpq_class(num[i], den);
    q[i].canonicalize();
  }
  mpq_class m[3][3];  // columns: q, q*theta, q*theta^2
  m[0][0] = q[0]; m[1][0] = q[1]; m[2][0] = q[2];
  m[0][1] = c * q[2]; m[1][1] = q[0]; m[2][1] = q[1];
  m[0][2] = c * q[1]; m[1][2] = c * q[2]; m[2][2] = q[0];
  mpq_class tr = m[0][0] + m[1][1] + m[2][2];
  mpq_class s2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] +
                 m[0][0] * m[2][2] - m[0][2] * m[2][0] +
                 m[1][1] * m[2][2] - m[1][2] * m[2][1];
  mpq_class det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                  m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                  m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return tr.get_den() == 1 && s2.get_den() == 1 && det.get_den() == 1;
}

}  // namespace

CubicOrder cubic_maximal_order(const mpz_class& c) {
  if (c < 2) throw std::invalid_argument("cubic_maximal_order: c < 2");
  if (!is_pth_power_free(c, 3))
    throw std::invalid_argument("cubic_maximal_order: c not cube-free");
  CubicOrder O;
  O.c = c;
  O.a = 1;
  O.b = 1;
  for (const auto& [q, e] : factorize(c)) {
    if (e == 1)
      O.a *= q;
    else
      O.b *= q;
  }
  O.type = (mpz_fdiv_ui(mpz_class(c * c).get_mpz_t(), 9) == 1) ? 1 : 2;
  mpz_class D = (O.type == 1) ? mpz_class(3 * O.b) : O.b;

  // Generators of D * O_K in the power basis.
  std::vector<Vec3> gcols;
  gcols.push_back({D, 0, 0});
  gcols.push_back({0, D, 0});
  gcols.push_back({0, 0, D / O.b});  // theta^2/b is integral: (th^2/b)^2 = a th
  if (O.type == 1) {
    // scan (r0 + r1 th + r2 th^2/b) / 3 for integrality; classical theory
    // guarantees a hit with r2 != 0
    bool found = false;
    for (int r0 = 0; r0 < 3; ++r0)
      for (int r1 = 0; r1 < 3; ++r1)
        for (int r2 = 0; r2 < 3; ++r2) {
          if (r0 == 0 && r1 == 0 && r2 == 0) continue;
          Vec3 num{O.b * r0, O.b * r1, mpz_class(r2)};
          if (power_vec_integral(num, D, c)) {
            gcols.push_back(num);
            found = found || r2 != 0;
          }
        }
    if (!found)
      throw std::runtime_error("cubic_maximal_order: no index-3 vector");
  }
  MatZ gens(3, gcols.size());
  for (std::size_t j = 0; j < gcols.size(); ++j)
    for (int i = 0; i < 3; ++i) gens.at(i, j) = gcols[j][i];
  O.basis_num = hnf_upper(gens);
  O.basis_den = D;

  // Discriminant from the basis change: disc = (det/D^3)^2 * (-27 c^2).
  mpz_class dt = diag_product(O.basis_num);
  mpz_class d3 = D * D * D;
  if (d3 % dt != 0)
    throw std::runtime_error("cubic_maximal_order: basis determinant");
  O.index = d3 / dt;  // [O_K : Z[theta]]
  mpz_class expect_index = (O.type == 1) ? mpz_class(3 * O.b) : O.b;
  if (O.index != expect_index)
    throw std::runtime_error("cubic_maximal_order: wrong index");
  mpz_class disc_pow = -27 * c * c;
  O.disc = disc_pow / (O.index * O.index);
  if (O.disc * O.index * O.index != disc_pow)
    throw std::runtime_error("cubic_maximal_order: discriminant not integral");

  // Multiplication table over the order basis; its integrality is the
  // closure check.
  std::array<std::array<mpq_class, 3>, 3> bq;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      bq[j][i] = mpq_class(O.basis_num.at(i, j), D);
      bq[j][i].canonicalize();
    }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      auto prod = power_mul(bq[i], bq[j], c);
      std::vector<mpz_class> w(3);
      for (int k = 0; k < 3; ++k) {
        mpq_class t = prod[k] * D;
        if (t.get_den() != 1)
          throw std::runtime_error("cubic_maximal_order: not closed");
        w[k] = t.get_num();
      }
      if (!hnf_contains(O.basis_num, w))
        throw std::runtime_error("cubic_maximal_order: not closed");
      auto x = hnf_solve(O.basis_num, w);
      for (int k = 0; k < 3; ++k) O.mult[i][j][k] = x[k];
    }
  return O;
}

// ---- order-level arithmetic ----

std::array<mpz_class, 3> order_element_mul(const CubicOrder& O, const Vec3& x,
                                           const Vec3& y) {
  Vec3 z{};
  for (int i = 0; i < 3; ++i) {
    if (x[i] == 0) continue;
    for (int j = 0; j < 3; ++j) {
      if (y[j] == 0) continue;
      mpz_class f = x[i] * y[j];
      for (int k = 0; k < 3; ++k)
        if (O.mult[i][j][k] != 0) z[k] += f * O.mult[i][j][k];
    }
  }
  return z;
}

mpz_class order_element_norm(const CubicOrder& O, const Vec3& x) {
  // determinant of the multiplication-by-x matrix over the order basis
  mpz_class m[3][3];
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      mpz_class s = 0;
      for (int i = 0; i < 3; ++i)
        if (x[i] != 0 && O.mult[i][j][k] != 0) s += x[i] * O.mult[i][j][k];
      m[k][j] = s;
    }
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::array<mpz_class, 3> power_to_order(const CubicOrder& O,
                                        const Vec3& power_coords) {
  std::vector<mpz_class> w(3);
  for (int k = 0; k < 3; ++k) w[k] = O.basis_den * power_coords[k];
  if (!hnf_contains(O.basis_num, w))
    throw std::invalid_argument("power_to_order: element not in the order");
  auto x = hnf_solve(O.basis_num, w);
  return {x[0], x[1], x[2]};
}

std::vector<mpq_class> order_to_power(const CubicOrder& O,
                                      const Vec3& coords) {
  std::vector<mpq_class> out(3);
  for (int i = 0; i < 3; ++i) {
    mpz_class num = 0;
    for (int j = 0; j < 3; ++j) num += O.basis_num.at(i, j) * coords[j];
    out[i] = mpq_class(num, O.basis_den);
    out[i].canonicalize();
  }
  return out;
}

OrderIdeal order_unit_ideal() {
  OrderIdeal I;
  I.hnf = MatZ::identity(3);
  I.norm = 1;
  return I;
}

OrderIdeal order_ideal_from_columns(const CubicOrder&, const MatZ& gens,
                                    const mpz_class& mod) {
  OrderIdeal I;
  I.hnf = hnf_upper(gens, mod);
  I.norm = diag_product(I.hnf);
  return I;
}

OrderIdeal order_ideal_mul(const CubicOrder& O, const OrderIdeal& x,
                           const OrderIdeal& y) {
  MatZ gens(3, 9);
  std::size_t col = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vec3 u{x.hnf.at(0, i), x.hnf.at(1, i), x.hnf.at(2, i)};
      Vec3 v{y.hnf.at(0, j), y.hnf.at(1, j), y.hnf.at(2, j)};
      Vec3 w = order_element_mul(O, u, v);
      for (int k = 0; k < 3; ++k) gens.at(k, col) = w[k];
      ++col;
    }
  return order_ideal_from_columns(O, gens, x.norm * y.norm);
}

OrderIdeal order_ideal_pow(const CubicOrder& O, const OrderIdeal& x,
                           std::uint64_t e) {
  OrderIdeal acc = order_unit_ideal();
  OrderIdeal base = x;
  while (e) {
    if (e & 1) acc = order_ideal_mul(O, acc, base);
    e >>= 1;
    if (e) base = order_ideal_mul(O, base, base);
  }
  return acc;
}

bool order_ideal_contains(const OrderIdeal& x, const Vec3& elem) {
  return hnf_contains(x.hnf, to_vec(elem));
}

OrderIdeal to_order_ideal(const CubicOrder& O, const IdealHNF& I) {
  if (I.field.p != 3 || I.field.c != O.c)
    throw std::invalid_argument("to_order_ideal: different field");
  MatZ gens(3, 9);
  std::size_t col = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    Vec3 cj{I.hnf.at(0, j), I.hnf.at(1, j), I.hnf.at(2, j)};
    Vec3 x = power_to_order(O, cj);
    for (int k = 0; k < 3; ++k) {
      Vec3 ek{};
      ek[k] = 1;
      Vec3 w = order_element_mul(O, ek, x);
      for (int r = 0; r < 3; ++r) gens.at(r, col) = w[r];
      ++col;
    }
  }
  OrderIdeal J = order_ideal_from_columns(O, gens, I.norm);
  if (J.norm != I.norm)
    throw std::invalid_argument("to_order_ideal: ideal meets the ring index");
  return J;
}

// ---- degree-1 primes ----

namespace {

OrderIdeal ideal_from_two(const CubicOrder& O, const mpz_class& ell,
                          const Vec3& gen2) {
  MatZ gens(3, 6);
  for (int k = 0; k < 3; ++k) gens.at(k, k) = ell;
  for (int k = 0; k < 3; ++k) {
    Vec3 ek{};
    ek[k] = 1;
    Vec3 w = order_element_mul(O, ek, gen2);
    for (int r = 0; r < 3; ++r) gens.at(r, 3 + k) = w[r];
  }
  return order_ideal_from_columns(O, gens, ell);
}

// Nullspace basis of a 3x3 matrix mod ell (ell prime); column vectors.
std::vector<std::array<std::uint64_t, 3>> nullspace_mod(
    std::array<std::array<std::uint64_t, 3>, 3> m, std::uint64_t ell) {
  int pivot_col[3] = {-1, -1, -1};
  int rank = 0;
  for (int col = 0; col < 3 && rank < 3; ++col) {
    int pr = -1;
    for (int r = rank; r < 3; ++r)
      if (m[r][col] % ell != 0) {
        pr = r;
        break;
      }
    if (pr < 0) continue;
    std::swap(m[rank], m[pr]);
    std::uint64_t inv = invmod(m[rank][col] % ell, ell);
    for (int j = 0; j < 3; ++j) m[rank][j] = mulmod(m[rank][j] % ell, inv, ell);
    for (int r = 0; r < 3; ++r) {
      if (r == rank) continue;
      std::uint64_t f = m[r][col] % ell;
      if (!f) continue;
      for (int j = 0; j < 3; ++j) {
        std::uint64_t sub = mulmod(f, m[rank][j], ell);
        m[r][j] = (m[r][j] + ell - sub) % ell;
      }
    }
    pivot_col[rank] = col;
    ++rank;
  }
  std::vector<std::array<std::uint64_t, 3>> basis;
  for (int col = 0; col < 3; ++col) {
    bool is_pivot = false;
    for (int r = 0; r < rank; ++r) is_pivot = is_pivot || pivot_col[r] == col;
    if (is_pivot) continue;
    std::array<std::uint64_t, 3> v{};
    v[col] = 1;
    for (int r = 0; r < rank; ++r)
      v[pivot_col[r]] = (ell - m[r][col] % ell) % ell;
    basis.push_back(v);
  }
  return basis;
}

}  // namespace

std::vector<CubicPrime> degree1_primes_above(const CubicOrder& O,
                                             const mpz_class& ell) {
  if (!is_prime(ell))
    throw std::invalid_argument("degree1_primes_above: ell not prime");
  if (!ell.fits_ulong_p() || ell >= (mpz_class(1) << 32))
    throw std::invalid_argument("degree1_primes_above: ell too large");
  std::uint64_t l = ell.get_ui();
  std::vector<CubicPrime> out;

  if (O.index % ell != 0) {
    // Kummer: one prime (ell, theta - r) per root r of X^3 = c mod ell
    std::uint64_t cr = mpz_fdiv_ui(O.c.get_mpz_t(), l);
    std::vector<std::uint64_t> roots;
    if (cr == 0) {
      roots.push_back(0);
    } else if (l == 2) {
      roots.push_back(1);
    } else if (l == 3) {
      roots.push_back(cr % 3);  // X^3 - c = (X - c)^3 mod 3
    } else if (l % 3 == 2) {
      // cubing is a bijection on F_l^*
      roots.push_back(powmod(cr, invmod(3, l - 1), l));
    } else if (auto r0 = pth_root_mod_prime(cr, 3, l)) {
      std::uint64_t w =
          powmod(primitive_root((std::uint32_t)l), (l - 1) / 3, l);
      roots = {*r0, mulmod(*r0, w, l), mulmod(mulmod(*r0, w, l), w, l)};
      std::sort(roots.begin(), roots.end());
    }
    for (std::uint64_t r : roots) {
      Vec3 gen = power_to_order(O, {mpz_class(ell - r), 1, 0});  // theta - r
      CubicPrime P{ell, ideal_from_two(O, ell, gen)};
      if (P.ideal.norm != ell)
        throw std::runtime_error("degree1_primes_above: bad Kummer ideal");
      out.push_back(std::move(P));
    }
    return out;
  }

  // ell divides the index: the degree-1 primes are the kernels of the
  // stable hyperplanes of O/ell, i.e. common left eigenvectors of the two
  // multiplier matrices.
  std::array<std::array<std::uint64_t, 3>, 3> M[2];
  for (int g = 0; g < 2; ++g)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        M[g][k][j] = mpz_fdiv_ui(O.mult[g + 1][j][k].get_mpz_t(), l);

  auto transpose = [](const std::array<std::array<std::uint64_t, 3>, 3>& m) {
    std::array<std::array<std::uint64_t, 3>, 3> t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t[i][j] = m[j][i];
    return t;
  };
  auto row_mul = [&](const std::array<std::uint64_t, 3>& phi,
                     const std::array<std::array<std::uint64_t, 3>, 3>& m) {
    std::array<std::uint64_t, 3> prod{};
    for (int j = 0; j < 3; ++j) {
      std::uint64_t s = 0;
      for (int i = 0; i < 3; ++i) s = (s + mulmod(phi[i], m[i][j], l)) % l;
      prod[j] = s;
    }
    return prod;
  };
  auto proportional = [&](const std::array<std::uint64_t, 3>& x,
                          const std::array<std::uint64_t, 3>& y) {
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if ((mulmod(x[i], y[j], l) + l - mulmod(x[j], y[i], l)) % l) return false;
    return true;
  };
  auto normalize = [&](std::array<std::uint64_t, 3> v) {
    for (int i = 0; i < 3; ++i)
      if (v[i]) {
        std::uint64_t inv = invmod(v[i], l);
        for (int j = 0; j < 3; ++j) v[j] = mulmod(v[j], inv, l);
        break;
      }
    return v;
  };

  std::set<std::array<std::uint64_t, 3>> lines;
  auto consider = [&](const std::array<std::uint64_t, 3>& phi) {
    if (phi[0] == 0 && phi[1] == 0 && phi[2] == 0) return;
    if (proportional(row_mul(phi, M[0]), phi) &&
        proportional(row_mul(phi, M[1]), phi))
      lines.insert(normalize(phi));
  };
  auto scalar_matrix =
      [&](const std::array<std::array<std::uint64_t, 3>, 3>& m) {
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            if (i != j ? m[i][j] != 0 : m[i][j] != m[0][0]) return false;
        return true;
      };

  bool s1 = scalar_matrix(M[0]), s2 = scalar_matrix(M[1]);
  if (s1 && s2) {
    // every hyperplane is stable; enumerate all of P^2
    for (std::uint64_t x = 0; x < l; ++x)
      for (std::uint64_t y = 0; y < l; ++y) consider({1, x, y});
    for (std::uint64_t y = 0; y < l; ++y) consider({0, 1, y});
    consider({0, 0, 1});
  } else {
    const auto& A = s1 ? M[1] : M[0];
    auto At = transpose(A);
    for (std::uint64_t x = 0; x < l; ++x) {
      auto shifted = At;
      for (int i = 0; i < 3; ++i) shifted[i][i] = (shifted[i][i] + l - x) % l;
      auto null = nullspace_mod(shifted, l);
      if (null.empty()) continue;
      if (null.size() == 1) {
        consider(null[0]);
      } else if (null.size() == 2) {
        for (std::uint64_t t = 0; t < l; ++t) {
          std::array<std::uint64_t, 3> v;
          for (int i = 0; i < 3; ++i)
            v[i] = (null[0][i] + mulmod(t, null[1][i], l)) % l;
          consider(v);
        }
        consider(null[1]);
      } else {
        throw std::runtime_error("degree1_primes_above: degenerate algebra");
      }
    }
  }

  for (const auto& phi : lines) {
    int piv = phi[0] ? 0 : (phi[1] ? 1 : 2);
    MatZ gens(3, 5);
    for (int k = 0; k < 3; ++k) gens.at(k, k) = ell;
    std::size_t col = 3;
    for (int j = 0; j < 3; ++j) {
      if (j == piv) continue;
      // e_j - phi_j e_piv lies in ker(phi) (phi_piv = 1 after normalize)
      gens.at(j, col) = 1;
      gens.at(piv, col) = ell - phi[j];
      ++col;
    }
    OrderIdeal I = order_ideal_from_columns(O, gens, ell);
    if (I.norm != ell)
      throw std::runtime_error("degree1_primes_above: bad stable hyperplane");
    out.push_back(CubicPrime{ell, std::move(I)});
  }
  std::sort(out.begin(), out.end(),
            [](const CubicPrime& x, const CubicPrime& y) {
              return x.ideal.hnf.a < y.ideal.hnf.a;
            });
  return out;
}

// ---- the engine ----

struct CubicClassGroup::Embedding {
  unsigned long prec = 0;
  mpf_class theta;  // real cube root of c
  MatF rows;        // row j = unskewed embedding of order basis vector j
};

CubicClassGroup::Embedding CubicClassGroup::build_embedding(
    const CubicOrder& O, unsigned long prec) {
  Embedding E;
  E.prec = prec;
  E.theta = f_cbrt(O.c, prec);
  mpf_class t2(E.theta * E.theta, prec);
  mpf_class s3(3, prec), s2(2, prec);
  mpf_sqrt(s3.get_mpf_t(), s3.get_mpf_t());
  mpf_sqrt(s2.get_mpf_t(), s2.get_mpf_t());
  mpf_class den(0, prec);
  den = O.basis_den;
  E.rows.assign(3, VecF(3, mpf_class(0, prec)));
  for (int j = 0; j < 3; ++j) {
    mpf_class n0(0, prec), n1(0, prec), n2(0, prec);
    n0 = O.basis_num.at(0, j);
    n1 = O.basis_num.at(1, j);
    n2 = O.basis_num.at(2, j);
    // sigma_0: theta -> t;  sigma_1: theta -> t(-1 + i sqrt3)/2; the sqrt2
    // weights make the row norm the T2 norm, so the Gram determinant is
    // |disc| and the covolume sqrt|disc|.
    E.rows[j][0] = (n0 + n1 * E.theta + n2 * t2) / den;
    mpf_class re((n0 - (n1 * E.theta + n2 * t2) / 2) / den, prec);
    mpf_class im(((s3 / 2) * (n1 * E.theta - n2 * t2)) / den, prec);
    E.rows[j][1] = s2 * re;
    E.rows[j][2] = s2 * im;
  }
  return E;
}

MatF CubicClassGroup::skewed_rows(const Embedding& E, const MatZ& basis_cols,
                                  double t) {
  unsigned long prec = E.prec;
  mpf_class tf(t, prec);
  mpf_class e0 = f_exp(mpf_class(-tf, prec), prec);
  mpf_class e1 = f_exp(mpf_class(tf / 2, prec), prec);
  MatF rows(3, VecF(3, mpf_class(0, prec)));
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      mpf_class acc(0, prec);
      for (int j = 0; j < 3; ++j) {
        if (basis_cols.at(j, i) == 0) continue;
        mpf_class f(0, prec);
        f = basis_cols.at(j, i);
        acc += f * E.rows[j][k];
      }
      rows[i][k] = acc * (k == 0 ? e0 : e1);
    }
  return rows;
}

namespace {

double truncated_artin_l1(const CubicOrder& O, std::uint32_t bound) {
  double L = 1.0;
  for (std::uint32_t ell : primes_up_to(bound)) {
    double x = 1.0 / ell;
    if (ell == 3) {
      if (O.type == 1) L *= 1.5;  // 3 = P^2 Q: local factor (1 - 1/3)^-1
      continue;                   // type II: totally ramified
    }
    if (mpz_divisible_ui_p(O.c.get_mpz_t(), ell)) continue;  // ramified
    if (ell % 3 == 2) {
      L /= 1.0 - x * x;
      continue;
    }
    std::uint64_t cr = mpz_fdiv_ui(O.c.get_mpz_t(), ell);
    if (powmod(cr, (ell - 1) / 3, ell) == 1)
      L /= (1.0 - x) * (1.0 - x);  // totally split
    else
      L /= 1.0 + x + x * x;  // inert
  }
  return L;
}

double real_gcd(double x, double y) {
  x = std::abs(x);
  y = std::abs(y);
  while (y > 1e-8) {
    double r = x - std::round(x / y) * y;
    x = y;
    y = std::abs(r);
  }
  return x;
}

}  // namespace

CubicClassGroup::CubicClassGroup(const mpz_class& c)
    : order_(cubic_maximal_order(c)) {
  const double pi = std::numbers::pi;
  mpz_class ad = abs(order_.disc);
  double sd = std::sqrt(ad.get_d());
  minkowski_ = (8.0 / (9.0 * pi)) * sd;
  if (minkowski_ > 20000)
    throw std::runtime_error(
        "backend failure: field too large for the builtin engine");
  std::uint32_t bound = std::max<std::uint32_t>(2, (std::uint32_t)minkowski_);
  smooth_ells_ = primes_up_to(bound);
  for (std::uint32_t ell : smooth_ells_) {
    for (auto& P : degree1_primes_above(order_, ell)) {
      cols_by_ell_[ell].push_back(cols_.size());
      powers_.push_back({P.ideal.hnf});
      cols_.push_back(std::move(P));
    }
  }
  one_ = power_to_order(order_, {1, 0, 0});
  vp_of_ell_.resize(cols_.size());
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    Vec3 le{cols_[i].ell * one_[0], cols_[i].ell * one_[1],
            cols_[i].ell * one_[2]};
    vp_of_ell_[i] = element_valuation(i, le);
  }
  analytic_hr_ = sd * truncated_artin_l1(order_, 1000000) / (2 * pi);

  // relations carried by the rational primes themselves
  for (std::uint32_t ell : smooth_ells_) {
    Vec3 le{ell * one_[0], ell * one_[1], ell * one_[2]};
    add_relation(relation_of(le, order_element_norm(order_, le)));
  }

  const std::size_t n = cols_.size();
  const double norm_cap = 64.0 * sd;
  bool converged = false;
  double t_done = -1;
  for (double t_max = 24; t_max <= 4200 && !converged; t_max *= 2) {
    prec_ = std::max<unsigned long>(
        768, 64 * (unsigned long)((3 * t_max * 1.4427 + 320) / 64 + 1));
    mpf_set_default_prec(prec_);
    Embedding E = build_embedding(order_, prec_);

    if (t_done < 0)
      for (std::size_t i = 0; i < n; ++i) harvest_column(E, i, norm_cap);

    MatZ id = MatZ::identity(3);
    double r2 = 3.0 * std::pow(norm_cap, 2.0 / 3.0) * 1.35;
    for (double t = 0; t <= t_max; t += 2) {
      if (t <= t_done) continue;
      sweep(E, id, mpz_class(1), t, r2);
      if (t > 0) sweep(E, id, mpz_class(1), -t, r2);
    }
    t_done = t_max;

    if (relations_.size() >= n && unit_log_ > 1e-8 && try_snf()) {
      ratio_ = h_.get_d() * unit_log_ / analytic_hr_;
      if (ratio_ < 0.7)
        throw std::runtime_error(
            "backend failure: cubic engine analytic check failed");
      if (ratio_ < 1.45) {
        regulator_ = unit_log_;
        converged = true;
      }
    }
  }
  if (!converged)
    throw std::runtime_error(
        "backend failure: cubic class-group engine did not converge");
}

void CubicClassGroup::ensure_power(std::size_t i, std::size_t k) {
  while (powers_[i].size() < k) {
    OrderIdeal last{powers_[i].back(), diag_product(powers_[i].back())};
    OrderIdeal next = order_ideal_mul(order_, last, cols_[i].ideal);
    powers_[i].push_back(next.hnf);
  }
}

int CubicClassGroup::element_valuation(std::size_t i, const Vec3& x) {
  int v = 0;
  while (v < 192) {
    ensure_power(i, v + 1);
    if (!hnf_contains(powers_[i][v], to_vec(x))) break;
    ++v;
  }
  if (v >= 192) throw std::runtime_error("cubic engine: runaway valuation");
  return v;
}

int CubicClassGroup::ideal_valuation(std::size_t i, const OrderIdeal& I) {
  int v = 0;
  while (v < 192) {
    ensure_power(i, v + 1);
    bool in = true;
    for (int j = 0; j < 3 && in; ++j)
      in = hnf_contains(powers_[i][v],
                        {I.hnf.at(0, j), I.hnf.at(1, j), I.hnf.at(2, j)});
    if (!in) break;
    ++v;
  }
  if (v >= 192)
    throw std::runtime_error("cubic engine: runaway ideal valuation");
  return v;
}

std::vector<mpz_class> CubicClassGroup::decompose_smooth(
    const Vec3& alpha, const mpz_class& smooth_part, const OrderIdeal* I) {
  mpz_class m = abs(smooth_part);
  std::vector<std::pair<std::uint32_t, int>> fac;
  for (std::uint32_t ell : smooth_ells_) {
    if (m == 1) break;
    int e = 0;
    while (mpz_divisible_ui_p(m.get_mpz_t(), ell)) {
      mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), ell);
      ++e;
    }
    if (e) fac.emplace_back(ell, e);
  }
  if (m != 1) return {};  // not smooth over the factor base
  std::vector<mpz_class> w(cols_.size());
  for (auto [ell, e] : fac) {
    auto it = cols_by_ell_.find(ell);
    std::size_t cnt = it == cols_by_ell_.end() ? 0 : it->second.size();
    if (cnt == 0) {  // inert: the prime ideal (ell) is principal
      if (e % 3 != 0)
        throw std::runtime_error("cubic engine: inert prime, bad exponent");
      continue;
    }
    int S = 0;
    std::vector<int> vs(cnt);
    for (std::size_t k = 0; k < cnt; ++k) {
      std::size_t i = it->second[k];
      vs[k] = element_valuation(i, alpha) - (I ? ideal_valuation(i, *I) : 0);
      if (vs[k] < 0)
        throw std::runtime_error("cubic engine: negative cofactor valuation");
      S += vs[k];
    }
    int r2 = e - S;
    if (r2 < 0) throw std::runtime_error("cubic engine: valuation excess");
    if (r2 == 0) {
      for (std::size_t k = 0; k < cnt; ++k) w[it->second[k]] += vs[k];
    } else {
      // residual degree-2 prime Q2 with [Q2] = -[P]; only the P*Q2 splitting
      // shape has one, and there v_P(ell) = 1
      if (cnt != 1 || vp_of_ell_[it->second[0]] != 1 || r2 % 2 != 0)
        throw std::runtime_error("cubic engine: inconsistent decomposition");
      w[it->second[0]] += vs[0] - r2 / 2;
    }
  }
  return w;
}

std::vector<mpz_class> CubicClassGroup::relation_of(const Vec3& alpha,
                                                    const mpz_class& nrm) {
  if (nrm == 0) return {};
  return decompose_smooth(alpha, nrm, nullptr);
}

void CubicClassGroup::add_relation(std::vector<mpz_class> rel) {
  if (rel.empty()) return;
  if (relations_.size() > 6 * cols_.size() + 64) return;
  if (rel_seen_.insert(rel).second) relations_.push_back(std::move(rel));
}

void CubicClassGroup::note_unit(const Vec3& alpha, const Embedding& E) {
  // log of the real embedding; +-1 and precision dust are skipped
  auto pw = order_to_power(order_, alpha);
  mpf_class t2(E.theta * E.theta, E.prec);
  mpf_class x(0, E.prec);
  for (int i = 0; i < 3; ++i) {
    mpf_class num(0, E.prec), den(0, E.prec);
    num = pw[i].get_num();
    den = pw[i].get_den();
    mpf_class term(num / den, E.prec);
    if (i == 1) term *= E.theta;
    if (i == 2) term *= t2;
    x += term;
  }
  double lg = std::abs(f_log(mpf_class(abs(x), E.prec), E.prec).get_d());
  if (lg < 1e-9) return;
  unit_log_ = unit_log_ == 0 ? lg : real_gcd(unit_log_, lg);
}

void CubicClassGroup::sweep(const Embedding& E, const MatZ& basis_cols,
                            const mpz_class& basis_norm, double t, double r2) {
  MatF rows = skewed_rows(E, basis_cols, t);
  MatZ U;
  lll_reduce(rows, &U);
  mpf_class radius(r2, E.prec);
  enumerate_short_vectors(
      rows, radius, 3'000'000, [&](const std::vector<long>& x) {
        Vec3 alpha{};
        for (int j = 0; j < 3; ++j) {
          mpz_class cj = 0;
          for (int i = 0; i < 3; ++i)
            if (x[i]) cj += x[i] * U.at(i, j);
          if (cj == 0) continue;
          for (int k = 0; k < 3; ++k) alpha[k] += cj * basis_cols.at(k, j);
        }
        mpz_class nrm = order_element_norm(order_, alpha);
        if (nrm == 0) return;
        if (nrm == 1 || nrm == -1) {
          note_unit(alpha, E);
          return;
        }
        if (basis_norm == 1)
          add_relation(relation_of(alpha, nrm));
        else
          pending_.emplace_back(alpha, nrm);
      });
}

void CubicClassGroup::harvest_column(const Embedding& E, std::size_t i,
                                     double norm_cap) {
  for (const auto& rel : relations_)
    if (rel[i] != 0) return;  // already pinned by an earlier relation
  const double ell = cols_[i].ell.get_d();
  for (int round = 0; round < 14; ++round) {
    double t = (round + 1) / 2 * 3.0 * ((round % 2) ? -1 : 1);
    if (round == 0) t = 0;
    double esc = std::pow(1.6, round / 4);
    double r2 = 3.0 * std::pow(ell * norm_cap * esc, 2.0 / 3.0) * 1.35;
    pending_.clear();
    sweep(E, cols_[i].ideal.hnf, cols_[i].ideal.norm, t, r2);
    std::size_t before = relations_.size();
    for (auto& [alpha, nrm] : pending_) add_relation(relation_of(alpha, nrm));
    pending_.clear();
    if (relations_.size() > before) return;
  }
}

bool CubicClassGroup::try_snf() {
  const std::size_t n = cols_.size();
  if (n == 0) {
    h_ = 1;
    invariants_.clear();
    return true;
  }
  MatZ C(n, relations_.size());
  for (std::size_t j = 0; j < relations_.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) C.at(i, j) = relations_[j][i];
  MatZ H;
  try {
    H = hnf_upper(C);
  } catch (const std::runtime_error&) {
    return false;  // not yet full rank
  }
  // re-reduce modulo the determinant to keep the SNF entries small
  H = hnf_upper(C, diag_product(H));
  snf_d_ = smith_normal_form(H, &snf_u_);
  h_ = 1;
  invariants_.clear();
  for (const auto& d : snf_d_) {
    if (d == 0) return false;
    h_ *= d;
    if (d > 1) invariants_.push_back(d);
  }
  return true;
}

std::vector<mpz_class> CubicClassGroup::to_invariant_coords(
    const std::vector<mpz_class>& w) const {
  auto y = mat_vec(snf_u_, w);
  std::vector<mpz_class> out;
  for (std::size_t i = 0; i < snf_d_.size(); ++i) {
    if (snf_d_[i] <= 1) continue;
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), y[i].get_mpz_t(), snf_d_[i].get_mpz_t());
    out.push_back(r);
  }
  return out;
}

std::optional<std::vector<mpz_class>> CubicClassGroup::ideal_class_dlog(
    const OrderIdeal& I) {
  if (cols_.empty()) return std::vector<mpz_class>{};
  mpf_set_default_prec(prec_);
  Embedding E = build_embedding(order_, prec_);
  mpz_class ad = abs(order_.disc);
  double sd = std::sqrt(ad.get_d());
  double nI = I.norm.get_d();
  double t_lim = unit_log_ / 2 + 31;
  std::optional<std::vector<mpz_class>> hit;
  for (int round = 0; round < 5 && !hit; ++round) {
    double cap = nI * 64.0 * sd * std::pow(2.2, round);
    double r2 = 3.0 * std::pow(cap, 2.0 / 3.0) * 1.35;
    for (double t = 0; t <= t_lim && !hit; t += 3) {
      for (double s : {t, -t}) {
        pending_.clear();
        sweep(E, I.hnf, I.norm, s, r2);
        for (auto& [alpha, nrm] : pending_) {
          mpz_class q, r;
          mpz_class an = abs(nrm);
          mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), an.get_mpz_t(),
                      I.norm.get_mpz_t());
          if (r != 0) continue;
          auto w = decompose_smooth(alpha, q, &I);
          if (w.empty()) continue;
          // (alpha) = I * J: [I] = -[J]
          std::vector<mpz_class> neg(cols_.size());
          for (std::size_t k = 0; k < w.size(); ++k) neg[k] = -w[k];
          hit = to_invariant_coords(neg);
          break;
        }
        pending_.clear();
        if (hit || s == 0) break;
      }
    }
  }
  return hit;
}

std::optional<std::vector<mpz_class>> CubicClassGroup::prime_class_dlog(
    const CubicPrime& P) {
  if (!smooth_ells_.empty() && P.ell <= smooth_ells_.back()) {
    auto it = cols_by_ell_.find(P.ell.get_ui());
    if (it != cols_by_ell_.end()) {
      for (std::size_t i : it->second) {
        if (cols_[i].ideal.hnf == P.ideal.hnf) {
          std::vector<mpz_class> w(cols_.size());
          w[i] = 1;
          return to_invariant_coords(w);
        }
      }
    }
    throw std::invalid_argument("prime_class_dlog: unknown small prime");
  }
  return ideal_class_dlog(P.ideal);
}

mpz_class CubicClassGroup::class_order(
    const std::vector<mpz_class>& dlog) const {
  if (dlog.size() != invariants_.size())
    throw std::invalid_argument("class_order: wrong coordinate length");
  mpz_class ord = 1;
  for (std::size_t i = 0; i < dlog.size(); ++i) {
    mpz_class g = gcd(invariants_[i], dlog[i]);
    ord = lcm(ord, mpz_class(invariants_[i] / g));
  }
  return ord;
}

std::optional<std::vector<mpq_class>> CubicClassGroup::find_generator(
    const OrderIdeal& I, int extra_sweeps) {
  mpf_set_default_prec(prec_);
  Embedding E = build_embedding(order_, prec_);
  double t_lim = unit_log_ / 2 + 8 + extra_sweeps;
  for (int round = 0; round < 3; ++round) {
    double r2 =
        3.0 * std::pow(I.norm.get_d(), 2.0 / 3.0) * 8.0 * std::pow(2.0, round);
    for (double t = 0; t <= t_lim; t += 2) {
      for (double s : {t, -t}) {
        pending_.clear();
        sweep(E, I.hnf, I.norm, s, r2);
        for (auto& [alpha, nrm] : pending_) {
          if (abs(nrm) == I.norm) {
            auto out = order_to_power(order_, alpha);
            pending_.clear();
            return out;
          }
        }
        pending_.clear();
        if (s == 0) break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace hasse
