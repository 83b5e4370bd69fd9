#pragma once
// Reference implementations for the test suite, written independently of
// the library: direct scans and generic algorithms with no shared fast
// paths.  Slow on purpose — their only job is to be obviously correct.

#include <cstdint>
#include <vector>

#include <gmpxx.h>

namespace testoracle {

// #points of a x^p + b y^p + c z^p = 0 in P^2(F_q) by direct enumeration
// of affine representatives (q prime, q !| abc).
std::uint64_t naive_count_fq(std::uint64_t p, std::uint32_t q, long a,
                             long b, long c);

// Solvability of a x^p + b y^p + c z^p = 0 over Q_q by digit-by-digit
// depth-first search over primitive triples mod q^K, K the depth at which
// exhaustion is conclusive.  Throws std::runtime_error if the node cap is
// hit (never expected at the tested sizes).
bool naive_solvable_qq(std::uint64_t p, std::uint64_t q, long a, long b,
                       long c, std::uint64_t node_cap = 200'000'000);

// disc(x^p - c) through the Sylvester matrix of (f, f') and fraction-free
// Gaussian elimination.
mpz_class sylvester_disc(std::uint64_t p, const mpz_class& c);

// Degrees of the irreducible factors of x^p - c mod ell (with multiplicity
// one each; requires ell !| p c so the polynomial is squarefree), ascending.
// Plain distinct-degree factorization.
std::vector<int> ddf_degrees(std::uint64_t p, const mpz_class& c,
                             std::uint64_t ell);

}  // namespace testoracle
