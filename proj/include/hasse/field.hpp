#pragma once
// Arithmetic of the degree-p pure field K = Q(theta), theta^p = c, inside
// the monogenic order Z[theta]: polynomial discriminant, index-divisor test
// (Dedekind criterion, closed forms for X^p - c), splitting shapes of
// rational primes, and HNF ideal arithmetic.  Everything here stays coprime
// to the index [O_K : Z[theta]], which is all the pipeline ever needs.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "hasse/linalg.hpp"

namespace hasse {

struct PureFieldParams {
  std::uint64_t p = 0;    // odd prime
  mpz_class c;            // >= 2, free of p-th powers
  mpz_class poly_disc;    // disc(X^p - c) = (-1)^((p-1)(p-2)/2) p^p c^(p-1)
  bool wieferich_ok = false;  // c^(p-1) != 1 (mod p^2)
};

// Validates c (>= 2, p-th-power-free; violations throw
// std::invalid_argument("c not p-th-power-free")) and fills the record.
PureFieldParams field_data(std::uint64_t p, const mpz_class& c);

// One run of the Dedekind criterion on X^p - c at ell, with a replayable
// case analysis (closed forms: ell coprime to p*c, ell | c, ell = p).
struct DedekindCheck {
  mpz_class ell;
  bool divides_index;
  std::string transcript;
};
DedekindCheck dedekind_at(const mpz_class& ell, const PureFieldParams& field);

// true iff ell divides the index of Z[theta] in O_K.
bool index_divisor(const mpz_class& ell, const PureFieldParams& field);

// Splitting of ell in O_K as (residue_degree, multiplicity) per prime
// above ell, read off X^p - c mod ell.  Requires ell !| index; otherwise
// throws std::runtime_error("order not maximal at ell; shape undefined by
// this method").
std::vector<std::pair<int, int>> factor_shape(const mpz_class& ell,
                                              const PureFieldParams& field);

// ---- ideals of Z[theta], column-style HNF in the power basis ----

struct IdealHNF {
  PureFieldParams field;
  MatZ hnf;        // p x p upper triangular, positive diagonal, reduced
  mpz_class norm;  // det(hnf) = [Z[theta] : I]
};

struct PrimeIdealHNF {
  mpz_class ell;
  mpz_class root;  // theta = root (mod the ideal)
  IdealHNF ideal;
};

// The unique degree-1 prime (ell, theta - a) above ell, for ell != p,
// ell != 1 (mod p), ell !| c (then automatically ell !| index).  a is the
// unique p-th root of c mod ell.  Violations throw
// std::invalid_argument("degree-1 prime not unique/defined").
PrimeIdealHNF prime_above_deg1(const mpz_class& ell,
                               const PureFieldParams& field);

IdealHNF unit_ideal(const PureFieldParams& field);

// Product module of two nonzero ideals (same field required).
IdealHNF ideal_mul(const IdealHNF& a, const IdealHNF& b);
IdealHNF ideal_pow(const IdealHNF& a, std::uint64_t e);

mpz_class ideal_norm(const IdealHNF& a);

// Membership of an element (power-basis coordinates) via HNF reduction.
bool ideal_contains(const IdealHNF& a, const std::vector<mpz_class>& elem);

// HNF bases are unique, so equality is matrix equality.
bool ideal_equal(const IdealHNF& a, const IdealHNF& b);

// Product of an ideal with a principal ideal (elem), e.g. for colon tests.
IdealHNF ideal_mul_element(const IdealHNF& a,
                           const std::vector<mpz_class>& elem);

// Multiplication of ring elements mod theta^p = c (power basis).
std::vector<mpz_class> element_mul(const std::vector<mpz_class>& x,
                                   const std::vector<mpz_class>& y,
                                   const PureFieldParams& field);

// Field norm N(x) of an element, as resultant(X^p - c, x(X)) computed by
// p x p determinant of the multiplication matrix.
mpz_class element_norm(const std::vector<mpz_class>& x,
                       const PureFieldParams& field);

}  // namespace hasse
