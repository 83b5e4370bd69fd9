#pragma once
// Exact density certificate for S: the primes ell avoiding every local
// obstruction form (up to finitely many exclusions) a union of residue
// classes modulo M = p^2 * (product of the constraining primes q); the
// certificate lists those classes per q and compares the resulting
// Dirichlet density d against the theorem's threshold 1/p^N.  Also an
// empirical Chebotarev scan of splitting fractions as a sanity check.

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "hasse/classgroup.hpp"
#include "hasse/exceptional.hpp"
#include "hasse/field.hpp"

namespace hasse {

struct DensityFactor {
  std::uint64_t q = 0;
  mpz_class modulus;                    // p^2 at q = p, else q
  std::vector<std::uint64_t> classes;   // admissible residues, ascending
  std::uint64_t count = 0;              // N_q = classes.size()
  // false when every unit class is admissible: the factor is recorded but
  // contributes nothing, and q is left out of M (q = p always constrains
  // through ell != 1 mod p).
  bool constrains = true;
};

struct DensityCertificate {
  std::uint64_t p = 0;
  mpz_class c;
  mpz_class M;                          // p^2 * prod of constraining q
  std::vector<DensityFactor> factors;   // q ascending; every mandatory q
  mpz_class admissible;                 // prod of N_q over factors of M
  mpq_class d;                          // admissible / phi(M), reduced
  unsigned N = 0;                       // from the class data
  mpq_class threshold;                  // 1 / p^N
  bool passes = false;                  // d > threshold (strict)
};

// Builds the certificate for x^p + ell y^p + c z^p.  Factors cover q = p
// (modulus p^2), every prime q | c with q != p, and every exceptional q.
// The theorem's hypotheses are rechecked first; failures throw
// std::runtime_error naming the failed condition ("condition 1 fails: ...",
// "condition 2 fails: ...").
DensityCertificate density_certificate(const PureFieldParams& field,
                                       const ClassGroupData& cls,
                                       const ExceptionalSet& exceptionals);

struct ChebotarevReport {
  std::uint64_t X = 0;
  std::uint64_t sample = 0;        // primes counted (ell <= X, ell !| p c)
  std::uint64_t split_count = 0;   // totally split: p ideals of degree 1
  std::uint64_t inert_count = 0;   // a single degree-p ideal
  mpq_class split_fraction, inert_fraction;
  mpq_class expected_split;        // 1 / (p (p-1))
  mpq_class expected_inert;        // 1 / p
};

// Full factor_shape scan over primes ell <= X (X >= 10^3, else
// std::invalid_argument); comparison tolerances belong to the caller.
ChebotarevReport empirical_chebotarev(const PureFieldParams& field,
                                      std::uint64_t X);

}  // namespace hasse
