#include "hasse/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hasse {

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  if (m == 1) return 0;
  std::uint64_t r = 1;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
  // extended Euclid on (a mod m, m); track only the coefficient of a
  std::int64_t t = 0, newt = 1;
  std::uint64_t r = m, newr = a % m;
  while (newr != 0) {
    std::uint64_t q = r / newr;
    std::int64_t tt = t - static_cast<std::int64_t>(q) * newt;
    t = newt;
    newt = tt;
    std::uint64_t rr = r - q * newr;
    r = newr;
    newr = rr;
  }
  if (r != 1) throw std::invalid_argument("invmod: not invertible");
  return t < 0 ? static_cast<std::uint64_t>(t + static_cast<std::int64_t>(m))
               : static_cast<std::uint64_t>(t);
}

std::uint64_t mult_order(std::uint64_t a, std::uint64_t m) {
  a %= m;
  if (std::gcd(a, m) != 1) throw std::invalid_argument("mult_order: gcd != 1");
  std::uint64_t x = a % m, ord = 1;
  while (x != 1 % m) {
    x = mulmod(x, a, m);
    if (++ord > m) throw std::logic_error("mult_order: did not terminate");
  }
  return ord;
}

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

bool is_prime(const mpz_class& n) {
  if (n < 2) return false;
  if (n.fits_ulong_p()) return is_prime_u64(n.get_ui());
  return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

int valuation(const mpz_class& n, const mpz_class& q) {
  if (n == 0) throw std::invalid_argument("valuation of 0");
  mpz_class m = abs(n);
  int v = 0;
  mpz_class r;
  while (true) {
    mpz_class quo;
    mpz_fdiv_qr(quo.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t(),
                q.get_mpz_t());
    if (r != 0) break;
    m = quo;
    ++v;
  }
  return v;
}

std::uint64_t pth_root_mod(const mpz_class& c, std::uint64_t p,
                           std::uint64_t ell) {
  mpz_class cm = c % static_cast<unsigned long>(ell);
  if (cm < 0) cm += static_cast<unsigned long>(ell);
  std::uint64_t cr = cm.get_ui();
  if (cr == 0) return 0;
  if (ell == p) return cr % ell;  // X^p - c == (X - c)^p mod p
  if ((ell - 1) % p == 0)
    throw std::invalid_argument("root not unique or undefined");
  if (ell == 2) return 1;  // c odd here
  std::uint64_t e = invmod(p % (ell - 1), ell - 1);
  return powmod(cr, e, ell);
}

std::optional<std::uint64_t> pth_root_mod_prime(std::uint64_t t,
                                                std::uint64_t p,
                                                std::uint64_t q) {
  t %= q;
  if (t == 0) return 0;
  if (q == 2) return 1;
  std::uint64_t n = q - 1;
  if (n % p != 0) return powmod(t, invmod(p % n, n), q);
  if (powmod(t, n / p, q) != 1) return std::nullopt;
  // q - 1 = p^s * m with p !| m; correct an initial guess inside the p-Sylow
  std::uint64_t m = n;
  int s = 0;
  while (m % p == 0) m /= p, ++s;
  std::uint64_t eta = 2;
  while (powmod(eta, n / p, q) == 1) ++eta;
  std::uint64_t xi = powmod(eta, m, q);  // generates the p-Sylow (order p^s)
  std::uint64_t z = (m == 1) ? 1 : powmod(t, invmod(p % m, m), q);
  // w = z^p / t is a p-th power inside <xi>; find its dlog j (base p digits)
  std::uint64_t w = mulmod(powmod(z, p, q), invmod(t, q), q);
  std::uint64_t j = 0, ppow_i = 1;
  std::vector<std::uint64_t> pp(s + 1);
  pp[0] = 1;
  for (int i = 1; i <= s; ++i) pp[i] = pp[i - 1] * p;
  std::uint64_t xi_top = powmod(xi, pp[s - 1], q);  // order p
  for (int i = 0; i < s; ++i) {
    std::uint64_t probe =
        powmod(mulmod(w, powmod(invmod(xi, q), j, q), q), pp[s - 1 - i], q);
    std::uint64_t digit = 0, acc = 1;
    while (acc != probe) {
      acc = mulmod(acc, xi_top, q);
      if (++digit >= p) throw std::logic_error("pth_root: dlog digit missing");
    }
    j += digit * ppow_i;
    ppow_i *= p;
  }
  if (j % p != 0) return std::nullopt;  // t was not a p-th power after all
  z = mulmod(z, powmod(invmod(xi, q), j / p, q), q);
  if (powmod(z, p, q) != t) throw std::logic_error("pth_root: verification");
  return z;
}

namespace {

std::uint64_t brent_rho(std::uint64_t n) {
  // Brent's cycle-finding variant of Pollard rho; n odd composite, not a
  // prime power of a trial-division prime.
  for (std::uint64_t c = 1;; ++c) {
    std::uint64_t x = 2, y = 2, d = 1;
    std::uint64_t power = 1, lam = 1;
    auto f = [&](std::uint64_t v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
      if (power == lam) {
        x = y;
        power *= 2;
        lam = 0;
      }
      y = f(y);
      ++lam;
      std::uint64_t diff = x > y ? x - y : y - x;
      if (diff == 0) break;
      d = std::gcd(diff, n);
    }
    if (d != 1 && d != n) return d;
  }
}

void factor_u64(std::uint64_t n, std::map<mpz_class, int>& out) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    out[mpz_class(static_cast<unsigned long>(n))] += 1;
    return;
  }
  std::uint64_t d = brent_rho(n);
  factor_u64(d, out);
  factor_u64(n / d, out);
}

}  // namespace

std::map<mpz_class, int> factorize(const mpz_class& n,
                                   std::uint64_t trial_bound) {
  if (n == 0) throw std::invalid_argument("factorize(0)");
  mpz_class m = abs(n);
  std::map<mpz_class, int> out;
  for (std::uint64_t p = 2; p <= trial_bound && p * p <= m; p += (p == 2 ? 1 : 2)) {
    while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
      out[mpz_class(static_cast<unsigned long>(p))] += 1;
      m /= static_cast<unsigned long>(p);
    }
  }
  if (m == 1) return out;
  if (is_prime(m)) {
    out[m] += 1;
    return out;
  }
  // perfect power of a prime?
  if (mpz_perfect_power_p(m.get_mpz_t())) {
    for (unsigned long k = 2; k <= mpz_sizeinbase(m.get_mpz_t(), 2); ++k) {
      mpz_class root;
      if (mpz_root(root.get_mpz_t(), m.get_mpz_t(), k) != 0) {
        if (is_prime(root)) {
          out[root] += static_cast<int>(k);
          return out;
        }
      }
    }
  }
  if (!m.fits_ulong_p())
    throw std::runtime_error("factorize: cofactor too large for rho fallback");
  factor_u64(m.get_ui(), out);
  return out;
}

bool is_pth_power_free(const mpz_class& c, std::uint64_t p) {
  for (const auto& [q, e] : factorize(c)) {
    (void)q;
    if (static_cast<std::uint64_t>(e) >= p) return false;
  }
  return true;
}

std::vector<std::uint32_t> primes_up_to(std::uint32_t n) {
  std::vector<char> sieve(static_cast<std::size_t>(n) + 1, 1);
  std::vector<std::uint32_t> out;
  if (n < 2) return out;
  sieve[0] = sieve[1] = 0;
  for (std::uint64_t i = 2; i * i <= n; ++i)
    if (sieve[i])
      for (std::uint64_t j = i * i; j <= n; j += i) sieve[j] = 0;
  for (std::uint32_t i = 2; i <= n; ++i)
    if (sieve[i]) out.push_back(i);
  return out;
}

ProgressionSieve::ProgressionSieve(std::uint64_t a, std::uint64_t M,
                                   std::uint64_t lo, std::uint64_t hi,
                                   std::size_t segment)
    : M_(M), hi_(hi), segment_(segment) {
  if (M == 0) throw std::invalid_argument("progression: modulus 0");
  a_ = a % M;
  if (std::gcd(a_, M) != 1)
    throw std::invalid_argument(
        "progression: gcd(a, M) != 1 (at most one prime)");
  if (hi > (std::uint64_t(1) << 52))
    throw std::invalid_argument("progression: range beyond 2^52 unsupported");
  if (lo < 2) lo = 2;
  if (hi < lo || hi < a_) {
    k_next_ = k_end_ = 0;
    return;
  }
  // candidate n = a_ + k*M for k in [k_next_, k_end_)
  k_next_ = lo > a_ ? (lo - a_ + M - 1) / M : 0;
  k_end_ = (hi - a_) / M + 1;
  if (k_next_ >= k_end_) {
    k_next_ = k_end_ = 0;
    return;
  }
  auto root = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(hi)));
  while (static_cast<std::uint64_t>(root) * root > hi) --root;
  while (static_cast<std::uint64_t>(root + 1) * (root + 1) <= hi) ++root;
  for (std::uint32_t p : primes_up_to(root))
    if (M % p != 0) base_.push_back(p);
}

void ProgressionSieve::fill_segment() {
  seg_lo_ = k_next_;
  seg_len_ = std::min<std::uint64_t>(segment_, k_end_ - seg_lo_);
  composite_.assign(seg_len_, 0);
  for (std::uint32_t p : base_) {
    // first k with a_ + k*M = 0 mod p and a_ + k*M >= p^2
    std::uint64_t k0 =
        mulmod(p - a_ % p, invmod(M_ % p, p), p);  // k = -a/M mod p
    std::uint64_t p2 = static_cast<std::uint64_t>(p) * p;
    std::uint64_t kmin =
        p2 > a_ ? (p2 - a_ + M_ - 1) / M_ : 0;  // n >= p^2
    if (k0 < kmin) k0 += ((kmin - k0 + p - 1) / p) * p;
    if (k0 < seg_lo_) k0 += ((seg_lo_ - k0 + p - 1) / p) * p;
    for (std::uint64_t k = k0; k < seg_lo_ + seg_len_; k += p)
      composite_[k - seg_lo_] = 1;
  }
  pos_ = 0;
  filled_ = true;
  k_next_ = seg_lo_ + seg_len_;
}

std::optional<std::uint64_t> ProgressionSieve::next() {
  while (true) {
    if (!filled_ || pos_ >= seg_len_) {
      if (k_next_ >= k_end_) return std::nullopt;
      fill_segment();
      if (seg_len_ == 0) return std::nullopt;
    }
    while (pos_ < seg_len_) {
      std::size_t i = pos_++;
      if (!composite_[i]) {
        std::uint64_t n = a_ + (seg_lo_ + i) * M_;
        if (n >= 2) return n;
      }
    }
  }
}

std::vector<std::uint64_t> primes_in_progression(std::uint64_t a,
                                                 std::uint64_t M,
                                                 std::uint64_t lo,
                                                 std::uint64_t hi) {
  ProgressionSieve s(a, M, lo, hi);
  std::vector<std::uint64_t> out;
  while (auto p = s.next()) out.push_back(*p);
  return out;
}

mpz_class pow_mpz(const mpz_class& base, unsigned long e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

std::uint32_t primitive_root(std::uint32_t q) {
  if (q == 2) return 1;
  std::uint32_t phi = q - 1;
  std::vector<std::uint32_t> pf;
  {
    std::uint32_t m = phi;
    for (std::uint32_t d = 2; static_cast<std::uint64_t>(d) * d <= m; ++d)
      if (m % d == 0) {
        pf.push_back(d);
        while (m % d == 0) m /= d;
      }
    if (m > 1) pf.push_back(m);
  }
  for (std::uint32_t g = 2; g < q; ++g) {
    bool ok = true;
    for (std::uint32_t r : pf)
      if (powmod(g, phi / r, q) == 1) {
        ok = false;
        break;
      }
    if (ok) return g;
  }
  throw std::logic_error("primitive_root: none found (q not prime?)");
}

}  // namespace hasse
