#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hasse/arith.hpp>
#include <hasse/exceptional.hpp>
#include <hasse/local.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <random>
#include <vector>

using namespace hasse;

TEST_CASE("projective counts match a direct scan") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 120; ++t) {
    std::uint64_t ps[] = {3, 5, 7};
    std::uint64_t p = ps[t % 3];
    std::uint32_t qs[] = {2, 5, 7, 11, 13, 17, 19, 29, 31, 43, 71, 113, 127, 197};
    std::uint32_t q = qs[rng() % 14];
    if (q == p) continue;
    long a = (long)(rng() % (q - 1)) + 1;
    long b = (long)(rng() % (q - 1)) + 1;
    long c = (long)(rng() % (q - 1)) + 1;
    CHECK(count_points_fq(DiagonalCurve{p, a, b, c}, q) ==
          testoracle::naive_count_fq(p, q, a, b, c));
  }
}

TEST_CASE("count is q+1 when the power map is onto") {
  for (std::uint64_t p : {3, 5, 7}) {
    for (std::uint32_t q : primes_up_to(200)) {
      if (q % p == 1 || q == p) continue;
      PowerClassTable tab(q, p);
      CHECK(tab.count(1, 1, 1) == q + 1);
      CHECK(tab.count(1, q - 1, 2 % q == 0 ? 1 : 2) == q + 1);
    }
  }
}

TEST_CASE("known counts") {
  PowerClassTable t7(7, 3);
  CHECK(t7.count(1, 1, 1) == 9);  // Fermat cubic over F_7
  CHECK(count_points_fq(DiagonalCurve{3, 1, 1, 1}, 13) == 9);
  CHECK(count_points_fq(DiagonalCurve{5, 1, 2, 4}, 11) == 0);  // 11 exceptional
}

TEST_CASE("class table roots and classes agree") {
  PowerClassTable tab(31, 3);
  CHECK(tab.d() == 3);
  for (std::uint32_t x = 1; x < 31; ++x) {
    bool cube = false;
    for (std::uint32_t z = 1; z < 31 && !cube; ++z)
      if (powmod(z, 3, 31) == x) cube = true;
    CHECK((tab.cls(x) == 0) == cube);
    auto r = tab.pth_root(x);
    CHECK(r.has_value() == cube);
    if (r) CHECK(powmod(*r, 3, 31) == x);
  }
}

TEST_CASE("find_point returns a genuine point exactly when one exists") {
  std::mt19937_64 rng(102);
  for (int t = 0; t < 150; ++t) {
    std::uint32_t qs[] = {7, 11, 13, 31, 43, 61, 71};
    std::uint32_t q = qs[rng() % 7];
    std::uint64_t p = (t % 2) ? 5 : 3;
    PowerClassTable tab(q, p);
    std::uint64_t a = rng() % (q - 1) + 1, b = rng() % (q - 1) + 1,
                  c = rng() % (q - 1) + 1;
    auto pt = tab.find_point(a, b, c);
    CHECK(pt.has_value() == (tab.count(a, b, c) > 0));
    if (pt) {
      auto [x, y, z] = *pt;
      CHECK((x || y || z));
      CHECK((a * powmod(x, p, q) + b * powmod(y, p, q) + c * powmod(z, p, q)) %
                q ==
            0);
    }
  }
}

TEST_CASE("Q_q solvability agrees with the digit search") {
  std::mt19937_64 rng(103);
  for (int t = 0; t < 200; ++t) {
    std::uint64_t p = (t % 2) ? 5 : 3;
    std::uint64_t qs[] = {2, 3, 5, 7};
    std::uint64_t q = qs[t % 4];
    auto coef = [&]() {
      long v = (long)(rng() % 41) - 20;
      return v == 0 ? 1L : v;
    };
    long a = coef(), b = coef(), c = coef();
    auto r = solvable_qq(DiagonalCurve{p, a, b, c}, q);
    CHECK(r.solvable == testoracle::naive_solvable_qq(p, q, a, b, c));
    if (r.solvable) {
      REQUIRE(r.witness.has_value());
      CHECK(verify_hensel_witness(DiagonalCurve{p, a, b, c}, q, *r.witness));
    } else {
      CHECK(r.exhausted_level > 0);
    }
  }
}

TEST_CASE("Selmer curve is locally solvable at 2, 3, 5") {
  for (std::uint64_t q : {2, 3, 5}) {
    auto r = solvable_qq(DiagonalCurve{3, 3, 4, 5}, q);
    CHECK(r.solvable);
    REQUIRE(r.witness.has_value());
    CHECK(verify_hensel_witness(DiagonalCurve{3, 3, 4, 5}, q, *r.witness));
  }
}

TEST_CASE("insolvable verdicts carry the exhaustion depth") {
  auto r307 = solvable_qq(DiagonalCurve{3, 1, 5, 921}, 307);
  CHECK_FALSE(r307.solvable);
  CHECK(r307.method == LocalMethod::Bfs);
  CHECK(r307.exhausted_level == 5);

  auto r5 = solvable_qq(DiagonalCurve{5, 1, 2, 19}, 5);
  CHECK_FALSE(r5.solvable);
  CHECK(r5.exhausted_level == 11);
}

TEST_CASE("verdicts are invariant under q-power scalings") {
  std::mt19937_64 rng(104);
  for (int t = 0; t < 40; ++t) {
    std::uint64_t q = (t % 2) ? 3 : 2;
    auto coef = [&]() {
      long v = (long)(rng() % 19) - 9;
      return v == 0 ? 2L : v;
    };
    long a = coef(), b = coef(), c = coef();
    bool base = solvable_qq(DiagonalCurve{3, a, b, c}, q).solvable;
    mpz_class qp = pow_mpz(mpz_class((unsigned long)q), 3);
    CHECK(solvable_qq(DiagonalCurve{3, a * qp, b, c}, q).solvable == base);
    CHECK(solvable_qq(
              DiagonalCurve{3, a * mpz_class((unsigned long)q),
                            b * mpz_class((unsigned long)q),
                            c * mpz_class((unsigned long)q)},
              q)
              .solvable == base);
  }
}

TEST_CASE("normalize_at_q brings valuations into range") {
  auto n = normalize_at_q(DiagonalCurve{3, 8, 12, 50}, 2);
  int minv = 99;
  for (auto& v : n) {
    CHECK(v != 0);
    int val = valuation(v, 2);
    CHECK(val < 3);
    minv = std::min(minv, val);
  }
  CHECK(minv == 0);
}

TEST_CASE("tampered witnesses are rejected") {
  std::mt19937_64 rng(105);
  int tampered = 0;
  for (int t = 0; t < 60 || tampered < 20; ++t) {
    REQUIRE(t < 500);
    std::uint64_t q = (t % 3 == 0) ? 2 : (t % 3 == 1 ? 3 : 5);
    auto coef = [&]() {
      long v = (long)(rng() % 41) - 20;
      return v == 0 ? 1L : v;
    };
    DiagonalCurve cv{(t % 2) ? 5ull : 3ull, coef(), coef(), coef()};
    auto r = solvable_qq(cv, q);
    if (!r.solvable) continue;
    auto w = *r.witness;
    w.x += 1;  // break the congruence
    bool still = verify_hensel_witness(cv, q, w);
    auto w2 = *r.witness;
    w2.level = 2 * w2.s;  // below the acceptance threshold 2s+1
    bool still2 = verify_hensel_witness(cv, q, w2);
    if (!still) ++tampered;
    CHECK_FALSE(still2);
  }
  CHECK(tampered >= 20);
}

TEST_CASE("solvable residue classes (published tables)") {
  CHECK(solvable_classes(3, 921, 3) == std::vector<std::uint64_t>{2, 5, 8});
  CHECK(solvable_classes(5, 19, 5) ==
        std::vector<std::uint64_t>{7, 8, 9, 12, 13, 17, 18, 19, 24});
  CHECK(solvable_classes(5, 19, 11) ==
        std::vector<std::uint64_t>{1, 2, 3, 4, 7, 8, 9, 10});
  CHECK(solvable_classes(7, 13, 7) ==
        std::vector<std::uint64_t>{2,  3,  5,  6,  10, 11, 12, 13, 16,
                                   17, 18, 19, 20, 30, 31, 32, 33, 37,
                                   38, 39, 41, 44, 46, 47, 48});
  CHECK(solvable_classes(3, 921, 307).size() == 102);
}

TEST_CASE("classes predict solvability of actual primes") {
  // membership in the mod-q class list must match a direct decision for
  // primes ell in the class
  auto classes = solvable_classes(3, 921, 307);
  std::mt19937_64 rng(106);
  int used = 0;
  for (std::uint64_t ell : primes_in_progression(0, 1, 5, 4000)) {
    if (ell % 3 == 1 || ell == 3 || ell == 307 || ell == 921 % ell) continue;
    if (rng() % 8) continue;
    bool in_list = std::binary_search(classes.begin(), classes.end(), ell % 307);
    bool solvable =
        solvable_qq(DiagonalCurve{3, 1, mpz_class((unsigned long)ell), 921}, 307)
            .solvable;
    CHECK(in_list == solvable);
    ++used;
  }
  CHECK(used > 30);
}

TEST_CASE("obstruction reports (field 3, 921)") {
  ExceptionalSet none;
  none.p = 3;

  auto clean = obstruction_report(3, 2, 921, {});
  CHECK(clean.no_obstruction);
  CHECK(clean.checked == std::vector<std::uint64_t>{2, 3, 307});
  CHECK_FALSE(clean.obstructed_at.has_value());
  CHECK(clean.checks.size() == 3);
  for (auto& ch : clean.checks) CHECK(ch.result.solvable);

  auto blocked = obstruction_report(3, 5, 921, {});
  CHECK_FALSE(blocked.no_obstruction);
  CHECK(blocked.checked == std::vector<std::uint64_t>{3, 5, 307});
  REQUIRE(blocked.obstructed_at.has_value());
  CHECK(*blocked.obstructed_at == 307);

  auto blocked11 = obstruction_report(3, 11, 921, {});
  CHECK_FALSE(blocked11.no_obstruction);
  CHECK(*blocked11.obstructed_at == 307);

  CHECK(obstruction_report(3, 17, 921, {}).no_obstruction);
}

TEST_CASE("obstruction reports (field 5, 19) include exceptional q") {
  std::vector<std::uint32_t> exc = {11};
  auto blocked = obstruction_report(5, 2, 19, exc);
  CHECK_FALSE(blocked.no_obstruction);
  CHECK(blocked.checked == std::vector<std::uint64_t>{2, 5, 11, 19});
  CHECK(*blocked.obstructed_at == 5);

  auto clean = obstruction_report(5, 13, 19, exc);
  CHECK(clean.no_obstruction);
  CHECK(clean.checked == std::vector<std::uint64_t>{5, 11, 13, 19});
}

TEST_CASE("obstruction report rejects ell outside the hunt domain") {
  CHECK_THROWS_AS((void)obstruction_report(3, 3, 921, {}),
                  std::invalid_argument);  // ell = p
  CHECK_THROWS_AS((void)obstruction_report(3, 307, 921, {}),
                  std::invalid_argument);  // ell | c
  CHECK_THROWS_AS((void)obstruction_report(3, 7, 921, {}),
                  std::invalid_argument);  // ell = 1 (mod p)
  CHECK_THROWS_AS((void)obstruction_report(3, 15, 921, {}),
                  std::invalid_argument);  // composite
}

TEST_CASE("solvable even when every F_q point sits on the x = 0 line") {
  // 3x^3 + y^3 + z^3 has exactly three points over F_7, all with x = 0;
  // the witness must come from the missing chart.
  DiagonalCurve thin{3, 3, 1, 1};
  CHECK(count_points_fq(thin, 7) == 3);
  auto r = solvable_qq(thin, 7);
  CHECK(r.solvable);
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->x == 0);
  CHECK(verify_hensel_witness(thin, 7, *r.witness));

  // sweep all unit triples mod 7 against the exact count
  for (long a = 1; a < 7; ++a)
    for (long b = 1; b < 7; ++b)
      for (long c = 1; c < 7; ++c) {
        DiagonalCurve cur{3, a, b, c};
        auto rr = solvable_qq(cur, 7);
        CHECK(rr.solvable == (count_points_fq(cur, 7) > 0));
        if (rr.solvable) CHECK(verify_hensel_witness(cur, 7, *rr.witness));
      }
}
