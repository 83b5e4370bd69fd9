#include "hasse/field.hpp"

#include <sstream>
#include <stdexcept>

#include "hasse/arith.hpp"

namespace hasse {

namespace {

std::vector<mpz_class> column(const MatZ& m, std::size_t j) {
  std::vector<mpz_class> v(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) v[i] = m.at(i, j);
  return v;
}

void require_same_field(const IdealHNF& a, const IdealHNF& b,
                        const char* who) {
  if (a.field.p != b.field.p || a.field.c != b.field.c)
    throw std::invalid_argument(std::string(who) + ": mismatched fields");
}

}  // namespace

PureFieldParams field_data(std::uint64_t p, const mpz_class& c) {
  if (p < 3 || !is_prime_u64(p))
    throw std::invalid_argument("field_data: p must be an odd prime");
  if (c < 2) throw std::invalid_argument("field_data: c must be >= 2");
  if (!is_pth_power_free(c, p))
    throw std::invalid_argument("c not p-th-power-free");
  PureFieldParams f;
  f.p = p;
  f.c = c;
  f.poly_disc =
      pow_mpz(mpz_class(static_cast<unsigned long>(p)), p) * pow_mpz(c, p - 1);
  if ((p - 1) * (p - 2) / 2 % 2 == 1) f.poly_disc = -f.poly_disc;
  mpz_class p2 = mpz_class(static_cast<unsigned long>(p)) *
                 static_cast<unsigned long>(p);
  mpz_class r;
  mpz_powm_ui(r.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(p - 1),
              p2.get_mpz_t());
  f.wieferich_ok = (r != 1);
  return f;
}

DedekindCheck dedekind_at(const mpz_class& ell, const PureFieldParams& field) {
  if (ell < 2 || !is_prime(ell))
    throw std::invalid_argument("dedekind_at: ell not prime");
  DedekindCheck out;
  out.ell = ell;
  std::ostringstream t;
  const std::uint64_t p = field.p;
  mpz_class pz = static_cast<unsigned long>(p);

  if (field.c % ell != 0 && ell != pz) {
    out.divides_index = false;
    t << "ell !| p*c: gcd(X^p - c, p X^(p-1)) = 1 mod ell, so X^p - c is "
         "squarefree mod ell and ell does not divide the index";
  } else if (field.c % ell == 0) {
    int v = valuation(field.c, ell);
    // X^p - c = X^p mod ell: radical g = X, cofactor h = X^(p-1),
    // T = (g h - (X^p - c))/ell = c/ell
    out.divides_index = (v >= 2);
    t << "ell | c with v_ell(c) = " << v
      << ": T = c/ell is constant; gcd(X, X^(p-1), T) "
      << (v >= 2 ? "= X (T = 0 mod ell): index divisor"
                 : "= 1 (T a unit mod ell): not an index divisor");
  } else {
    // ell = p, p !| c: X^p - c = (X - c)^p mod p, T = ((X-c)^p - X^p + c)/p,
    // (X - c) | T mod p iff T(c) = (c - c^p)/p = 0 mod p iff
    // c^(p-1) = 1 mod p^2
    mpz_class p2 = pz * pz, r;
    mpz_powm_ui(r.get_mpz_t(), field.c.get_mpz_t(),
                static_cast<unsigned long>(p - 1), p2.get_mpz_t());
    out.divides_index = (r == 1);
    t << "ell = p: (X - c) | T mod p iff c^(p-1) = 1 mod p^2; here c^(p-1) = "
      << r.get_str() << " mod p^2, so p "
      << (out.divides_index ? "divides" : "does not divide") << " the index";
  }
  out.transcript = t.str();
  return out;
}

bool index_divisor(const mpz_class& ell, const PureFieldParams& field) {
  return dedekind_at(ell, field).divides_index;
}

std::vector<std::pair<int, int>> factor_shape(const mpz_class& ell,
                                              const PureFieldParams& field) {
  if (index_divisor(ell, field))
    throw std::runtime_error(
        "order not maximal at ell; shape undefined by this method");
  const std::uint64_t p = field.p;
  mpz_class pz = static_cast<unsigned long>(p);
  if (field.c % ell == 0 || ell == pz)
    return {{1, static_cast<int>(p)}};  // Eisenstein-type: totally ramified

  if ((ell - 1) % pz == 0) {
    // split test: c a p-th power mod ell <=> c^((ell-1)/p) = 1
    mpz_class e = (ell - 1) / pz, r;
    mpz_powm(r.get_mpz_t(), field.c.get_mpz_t(), e.get_mpz_t(),
             ell.get_mpz_t());
    if (r == 1)
      return std::vector<std::pair<int, int>>(p, {1, 1});  // totally split
    return {{static_cast<int>(p), 1}};  // inert
  }
  // X^p - c has a unique root mod ell; the cofactor splits into irreducible
  // blocks of size m = ord(ell mod p)
  std::uint64_t m = mult_order(mpz_fdiv_ui(ell.get_mpz_t(), p), p);
  std::vector<std::pair<int, int>> out{{1, 1}};
  for (std::uint64_t k = 0; k < (p - 1) / m; ++k)
    out.emplace_back(static_cast<int>(m), 1);
  return out;
}

PrimeIdealHNF prime_above_deg1(const mpz_class& ell,
                               const PureFieldParams& field) {
  mpz_class pz = static_cast<unsigned long>(field.p);
  if (!is_prime(ell) || ell == pz || (ell - 1) % pz == 0 ||
      field.c % ell == 0)
    throw std::invalid_argument("degree-1 prime not unique/defined");
  if (!ell.fits_ulong_p())
    throw std::invalid_argument("prime_above_deg1: ell too large");
  std::uint64_t l = ell.get_ui();
  std::uint64_t a = pth_root_mod(field.c, field.p, l);

  std::size_t n = field.p;
  MatZ h(n, n);
  h.at(0, 0) = ell;
  for (std::size_t j = 1; j < n; ++j) {
    h.at(j, j) = 1;
    h.at(0, j) = static_cast<unsigned long>((l - powmod(a, j, l)) % l);
  }
  PrimeIdealHNF out;
  out.ell = ell;
  out.root = static_cast<unsigned long>(a);
  out.ideal = IdealHNF{field, std::move(h), ell};
  return out;
}

IdealHNF unit_ideal(const PureFieldParams& field) {
  return IdealHNF{field, MatZ::identity(field.p), 1};
}

std::vector<mpz_class> element_mul(const std::vector<mpz_class>& x,
                                   const std::vector<mpz_class>& y,
                                   const PureFieldParams& field) {
  std::size_t n = field.p;
  if (x.size() != n || y.size() != n)
    throw std::invalid_argument("element_mul: bad coordinate length");
  std::vector<mpz_class> prod(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) prod[i + j] += x[i] * y[j];
  for (std::size_t k = 2 * n - 2; k >= n; --k)
    prod[k - n] += field.c * prod[k];  // theta^p = c
  prod.resize(n);
  return prod;
}

mpz_class element_norm(const std::vector<mpz_class>& x,
                       const PureFieldParams& field) {
  std::size_t n = field.p;
  if (x.size() != n)
    throw std::invalid_argument("element_norm: bad coordinate length");
  MatZ m(n, n);
  std::vector<mpz_class> e(n), col;
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0);
    e[j] = 1;
    col = element_mul(x, e, field);
    for (std::size_t i = 0; i < n; ++i) m.at(i, j) = col[i];
  }
  return det_bareiss(std::move(m));
}

IdealHNF ideal_mul(const IdealHNF& a, const IdealHNF& b) {
  require_same_field(a, b, "ideal_mul");
  if (a.norm == 0 || b.norm == 0)
    throw std::invalid_argument("ideal_mul: zero ideal");
  std::size_t n = a.field.p;
  MatZ gens(n, n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto ci = column(a.hnf, i);
    for (std::size_t j = 0; j < n; ++j) {
      auto prod = element_mul(ci, column(b.hnf, j), a.field);
      for (std::size_t r = 0; r < n; ++r) gens.at(r, i * n + j) = prod[r];
    }
  }
  MatZ h = hnf_upper(gens, a.norm * b.norm);
  mpz_class nrm = diag_product(h);
  return IdealHNF{a.field, std::move(h), std::move(nrm)};
}

IdealHNF ideal_pow(const IdealHNF& a, std::uint64_t e) {
  IdealHNF acc = unit_ideal(a.field);
  IdealHNF base = a;
  while (e) {
    if (e & 1) acc = ideal_mul(acc, base);
    e >>= 1;
    if (e) base = ideal_mul(base, base);
  }
  return acc;
}

mpz_class ideal_norm(const IdealHNF& a) {
  if (a.hnf.rows == 0) throw std::invalid_argument("ideal_norm: zero ideal");
  mpz_class d = diag_product(a.hnf);
  if (d == 0) throw std::invalid_argument("ideal_norm: zero ideal");
  return d;
}

bool ideal_contains(const IdealHNF& a, const std::vector<mpz_class>& elem) {
  if (elem.size() != a.hnf.rows)
    throw std::invalid_argument("ideal_contains: bad coordinate length");
  return hnf_contains(a.hnf, elem);
}

bool ideal_equal(const IdealHNF& a, const IdealHNF& b) {
  return a.field.p == b.field.p && a.field.c == b.field.c && a.hnf == b.hnf;
}

IdealHNF ideal_mul_element(const IdealHNF& a,
                           const std::vector<mpz_class>& elem) {
  std::size_t n = a.field.p;
  if (elem.size() != n)
    throw std::invalid_argument("ideal_mul_element: bad coordinate length");
  mpz_class nrm = element_norm(elem, a.field);
  if (nrm == 0) throw std::invalid_argument("ideal_mul_element: zero element");
  MatZ gens(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto prod = element_mul(column(a.hnf, j), elem, a.field);
    for (std::size_t r = 0; r < n; ++r) gens.at(r, j) = prod[r];
  }
  MatZ h = hnf_upper(gens, a.norm * abs(nrm));
  mpz_class d = diag_product(h);
  return IdealHNF{a.field, std::move(h), std::move(d)};
}

}  // namespace hasse
