#pragma once
// Elementary number theory: modular arithmetic, primality, valuations,
// p-th roots mod ell, factorization, and a segmented sieve over an
// arithmetic progression.  Bignum storage is GMP (mpz_class / mpq_class);
// everything algorithmic lives here.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

namespace hasse {

// ---- 64-bit modular arithmetic (modulus < 2^63) ----

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(
      static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

// Inverse of a mod m; throws std::invalid_argument if gcd(a, m) != 1.
std::uint64_t invmod(std::uint64_t a, std::uint64_t m);

// Multiplicative order of a mod m (gcd(a, m) = 1; intended for small m).
std::uint64_t mult_order(std::uint64_t a, std::uint64_t m);

// ---- primality ----

// Deterministic Miller-Rabin for the full 64-bit range (fixed witness set
// {2,3,...,37}, proven complete below 3.3e24).
bool is_prime_u64(std::uint64_t n);

// Deterministic below 2^64; above that mpz_probab_prime_p with 40 rounds
// (composites are never reported prime; a "prime" answer beyond 64 bits is
// probabilistic, documented in the README and CLI help).
bool is_prime(const mpz_class& n);

// ---- valuations and roots ----

// v_q(n) for n != 0.
int valuation(const mpz_class& n, const mpz_class& q);

// The unique root of X^p - c mod ell, for ell prime with ell % p != 1
// (the p-th power map is then a bijection on F_ell^*), or ell == p
// (X^p - c == (X - c)^p).  Throws std::invalid_argument("root not unique
// or undefined") when ell = 1 mod p.
std::uint64_t pth_root_mod(const mpz_class& c, std::uint64_t p,
                           std::uint64_t ell);

// Some root of z^p = t mod q (q prime, p prime), or nullopt if t is not a
// p-th power.  Bijective-exponent shortcut when p !| q-1, Adleman-Manders-
// Miller digit correction when p | q-1.
std::optional<std::uint64_t> pth_root_mod_prime(std::uint64_t t,
                                                std::uint64_t p,
                                                std::uint64_t q);

// ---- factorization ----

// Prime factorization of |n| > 0 as {prime -> exponent}.  Trial division up
// to trial_bound, then a Brent-rho fallback for any remaining cofactor.
std::map<mpz_class, int> factorize(const mpz_class& n,
                                   std::uint64_t trial_bound = 100000);

// True if c has no prime factor with multiplicity >= p.
bool is_pth_power_free(const mpz_class& c, std::uint64_t p);

// ---- sieves ----

// All primes <= n (simple sieve; n up to ~10^8).
std::vector<std::uint32_t> primes_up_to(std::uint32_t n);

// Streams primes n = a + k*M in [lo, hi], ascending, with O(segment) memory.
// Requires gcd(a, M) = 1 (otherwise the progression contains at most one
// prime); violations throw std::invalid_argument.
class ProgressionSieve {
 public:
  ProgressionSieve(std::uint64_t a, std::uint64_t M, std::uint64_t lo,
                   std::uint64_t hi, std::size_t segment = 1u << 20);

  // Next prime in the progression, or nullopt when the range is exhausted.
  std::optional<std::uint64_t> next();

 private:
  void fill_segment();

  std::uint64_t a_, M_, hi_;
  std::uint64_t k_next_, k_end_;  // candidate index range still to scan
  std::size_t segment_;
  std::vector<std::uint32_t> base_;  // primes <= sqrt(hi) not dividing M
  std::vector<char> composite_;
  std::uint64_t seg_lo_ = 0, seg_len_ = 0;
  std::size_t pos_ = 0;
  bool filled_ = false;
};

std::vector<std::uint64_t> primes_in_progression(std::uint64_t a,
                                                 std::uint64_t M,
                                                 std::uint64_t lo,
                                                 std::uint64_t hi);

// ---- misc ----

mpz_class pow_mpz(const mpz_class& base, unsigned long e);

// Smallest generator of (Z/q)^* for prime q >= 3.
std::uint32_t primitive_root(std::uint32_t q);

}  // namespace hasse
