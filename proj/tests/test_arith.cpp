#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hasse/arith.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

using namespace hasse;

TEST_CASE("powmod against gmp") {
  CHECK(powmod(2, 10, 1000) == 24);
  CHECK(powmod(0, 0, 7) == 1);
  CHECK(powmod(5, 0, 1) == 0);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t b = rng(), e = rng() % 1000, m = (rng() % ((1ull << 62) - 2)) + 2;
    mpz_class r;
    mpz_powm_ui(r.get_mpz_t(), mpz_class(b).get_mpz_t(), e,
                mpz_class(m).get_mpz_t());
    CHECK(powmod(b, e, m) == r.get_ui());
  }
}

TEST_CASE("mulmod full range") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t a = rng(), b = rng(), m = (rng() % ((1ull << 62) - 2)) + 2;
    mpz_class r = mpz_class(a) * mpz_class(b) % mpz_class(m);
    CHECK(mulmod(a % m, b % m, m) == r.get_ui());
  }
}

TEST_CASE("invmod") {
  for (std::uint64_t m : {5ull, 97ull, 1000003ull, (1ull << 61) - 1}) {
    std::mt19937_64 rng(m);
    for (int i = 0; i < 50; ++i) {
      std::uint64_t a = rng() % (m - 1) + 1;
      if (std::gcd(a, m) != 1) continue;
      CHECK(mulmod(a, invmod(a, m), m) == 1);
    }
  }
  CHECK_THROWS_AS((void)invmod(2, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)invmod(0, 7), std::invalid_argument);
}

TEST_CASE("mult_order") {
  CHECK(mult_order(2, 7) == 3);
  CHECK(mult_order(3, 7) == 6);
  CHECK(mult_order(1, 5) == 1);
  for (std::uint64_t m : {7ull, 11ull, 101ull, 169ull}) {
    for (std::uint64_t a = 2; a < m; ++a) {
      if (std::gcd(a, m) != 1) continue;
      std::uint64_t d = mult_order(a, m);
      CHECK(powmod(a, d, m) == 1);
      for (std::uint64_t k = 1; k < d; ++k)
        if (d % k == 0) CHECK(powmod(a, k, m) != 1);
    }
  }
}

TEST_CASE("is_prime_u64 vs sieve") {
  auto ps = primes_up_to(20000);
  std::set<std::uint64_t> prime_set(ps.begin(), ps.end());
  for (std::uint64_t n = 0; n <= 20000; ++n)
    CHECK(is_prime_u64(n) == (prime_set.count(n) > 0));
  CHECK(is_prime_u64((1ull << 61) - 1));       // Mersenne
  CHECK_FALSE(is_prime_u64((1ull << 61) + 1)); // 3 * 768614336404564651
  CHECK_FALSE(is_prime_u64(561));              // Carmichael
  CHECK_FALSE(is_prime_u64(1729));
  CHECK_FALSE(is_prime_u64(3215031751ull));    // strong pseudoprime to 2,3,5,7
  CHECK(is_prime_u64(18446744073709551557ull));  // largest 64-bit prime
}

TEST_CASE("is_prime on mpz") {
  CHECK(is_prime(mpz_class("1000000000000000009")));
  mpz_class m89 = (mpz_class(1) << 89) - 1;
  CHECK(is_prime(m89));
  mpz_class m127 = (mpz_class(1) << 127) - 1;
  CHECK(is_prime(m127));
  CHECK_FALSE(is_prime(m89 * m127));
  CHECK_FALSE(is_prime(mpz_class(1)));
  CHECK_FALSE(is_prime(mpz_class(-7)));
}

TEST_CASE("valuation") {
  CHECK(valuation(48, 2) == 4);
  CHECK(valuation(54, 3) == 3);
  CHECK(valuation(-49, 7) == 2);
  CHECK(valuation(5, 3) == 0);
  CHECK(valuation(mpz_class("1024"), 2) == 10);
}

TEST_CASE("pth_root_mod (bijective and ell = p cases)") {
  CHECK(pth_root_mod(2, 3, 5) == 3);   // 3^3 = 27 = 2 (mod 5)
  CHECK(pth_root_mod(10, 3, 3) == 1);  // X^3 - 10 = (X - 10)^3 mod 3
  CHECK(pth_root_mod(921, 3, 1499) == powmod(921 % 1499, invmod(3, 1498), 1499));
  CHECK_THROWS_AS((void)pth_root_mod(2, 3, 7), std::invalid_argument);
  // root really is a root, across a progression sweep
  for (std::uint64_t ell : primes_in_progression(2, 3, 2, 500)) {
    std::uint64_t r = pth_root_mod(921, 3, ell);
    CHECK(powmod(r, 3, ell) == 921 % ell);
  }
}

TEST_CASE("pth_root_mod_prime vs brute force") {
  for (std::uint64_t q : {7ull, 13ull, 31ull, 43ull, 61ull, 71ull, 11ull}) {
    for (std::uint64_t p : {3ull, 5ull, 7ull}) {
      for (std::uint64_t t = 1; t < q; ++t) {
        bool exists = false;
        for (std::uint64_t z = 1; z < q && !exists; ++z)
          if (powmod(z, p, q) == t) exists = true;
        auto r = pth_root_mod_prime(t, p, q);
        CHECK(r.has_value() == exists);
        if (r) CHECK(powmod(*r, p, q) == t);
      }
    }
  }
}

TEST_CASE("factorize") {
  auto f = factorize(mpz_class(2 * 2 * 2 * 2 * 9 * 5 * 7 * 11 * 13));
  CHECK(f[mpz_class(2)] == 4);
  CHECK(f[mpz_class(3)] == 2);
  CHECK(f[mpz_class(13)] == 1);

  // Brent rho past the trial bound
  mpz_class semi = mpz_class(1000003) * mpz_class(1000033);
  auto g = factorize(semi);
  REQUIRE(g.size() == 2);
  CHECK(g[mpz_class(1000003)] == 1);
  CHECK(g[mpz_class(1000033)] == 1);

  auto neg = factorize(mpz_class(-12));
  CHECK(neg[mpz_class(2)] == 2);
  CHECK(neg[mpz_class(3)] == 1);
  CHECK(factorize(mpz_class(1)).empty());

  std::mt19937_64 rng(13);
  for (int i = 0; i < 40; ++i) {
    mpz_class n = mpz_class(static_cast<unsigned long>(
        (rng() % 1000000000000ull) + 2));
    mpz_class back = 1;
    for (auto& [prime, e] : factorize(n)) {
      CHECK(is_prime(prime));
      back *= pow_mpz(prime, e);
    }
    CHECK(back == n);
  }
}

TEST_CASE("is_pth_power_free") {
  CHECK(is_pth_power_free(12, 3));
  CHECK(is_pth_power_free(4, 3));
  CHECK_FALSE(is_pth_power_free(8, 3));
  CHECK_FALSE(is_pth_power_free(16, 3));
  CHECK_FALSE(is_pth_power_free(921 * 27, 3));
  CHECK(is_pth_power_free(mpz_class(1) << 4, 5));
  CHECK_FALSE(is_pth_power_free(mpz_class(1) << 5, 5));
}

TEST_CASE("primes_up_to") {
  auto ps = primes_up_to(100);
  REQUIRE(ps.size() == 25);
  CHECK(ps.front() == 2);
  CHECK(ps.back() == 97);
  for (auto q : ps) CHECK(is_prime_u64(q));
}

TEST_CASE("progression sieve matches filter") {
  auto all = primes_up_to(20000);
  std::vector<std::uint64_t> want;
  for (auto q : all)
    if (q % 275 == 7 && q >= 2) want.push_back(q);
  CHECK(primes_in_progression(7, 275, 2, 20000) == want);

  want.clear();
  for (auto q : all)
    if (q % 3 == 1 && q <= 100) want.push_back(q);
  CHECK(primes_in_progression(1, 3, 2, 100) == want);

  // M = 1: every prime
  std::vector<std::uint64_t> all64(all.begin(), all.end());
  CHECK(primes_in_progression(0, 1, 2, 20000) == all64);

  // tiny segments must not change the stream
  ProgressionSieve tiny(2, 9, 2, 5000, 16);
  std::vector<std::uint64_t> got;
  while (auto n = tiny.next()) got.push_back(*n);
  CHECK(got == primes_in_progression(2, 9, 2, 5000));

  CHECK_THROWS_AS(ProgressionSieve(5, 275, 2, 100), std::invalid_argument);
  CHECK(primes_in_progression(2, 3, 600, 2).empty());
}

TEST_CASE("primitive_root") {
  CHECK(primitive_root(7) == 3);
  CHECK(primitive_root(3) == 2);
  for (auto q : primes_up_to(2000)) {
    if (q < 3) continue;
    std::uint32_t g = primitive_root(q);
    CHECK(mult_order(g, q) == q - 1);
    if (q < 300)
      for (std::uint32_t h = 2; h < g; ++h) CHECK(mult_order(h, q) != q - 1);
  }
}

TEST_CASE("pow_mpz") {
  CHECK(pow_mpz(3, 5) == 243);
  CHECK(pow_mpz(10, 0) == 1);
  CHECK(pow_mpz(mpz_class(-2), 3) == -8);
}
