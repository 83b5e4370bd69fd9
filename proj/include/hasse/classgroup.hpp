#pragma once
// Class-group data of K = Q(c^(1/p)) and principality tests, behind three
// interchangeable backends:
//   declared — invariants from a shipped table (or a user file); knows the
//              group, cannot test principality (verdict Unknown);
//   oracle   — external computer-algebra process (see oracle.hpp);
//   builtin  — the cubic engine for p = 3 (exact); for p >= 5 a bounded
//              short-vector generator search that can certify Principal
//              but returns Unknown on exhaustion.
// On top of these: the membership test for S0.  Here S is the set of
// primes ell (ell != 1 mod p, ell coprime to p, c and the index f) whose
// curve x^p + ell y^p + c z^p = 0 is solvable in every completion, and S0
// the subset where q^(e/p) is not principal, q the degree-1 prime above
// ell and e the exponent of Cl_K — those ell have no rational point, so
// the curve violates the Hasse principle.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "hasse/field.hpp"

namespace hasse {

enum class Backend { Declared, Oracle, Builtin };

const char* backend_tag(Backend kind);  // "declared" / "oracle" / "builtin"

struct BackendConfig {
  Backend kind = Backend::Declared;
  std::string oracle_cmd;      // JSON-lines subprocess (oracle backend)
  std::string oracle_cache;    // reply cache directory; empty = no cache
  std::string declared_path;   // JSON pair table; empty = compiled-in table
};

struct ClassGroupData {
  PureFieldParams field;
  mpz_class h;                        // class number = product of invariants
  std::vector<mpz_class> invariants;  // d1 | d2 | ... ascending, all > 1
  mpz_class e;                        // exponent = last invariant (1 if trivial)
  unsigned r = 0;                     // v_p(e)
  unsigned N = 0;                     // #invariants with v_p exactly r
  std::string source;                 // backend tag
};

// Fetches the group through the chosen backend and derives h, e, r, N from
// the invariants (recomputed and asserted regardless of source).  Backend
// problems throw std::runtime_error("backend failure: ...") — never a
// silent downgrade.
ClassGroupData class_data(const PureFieldParams& field,
                          const BackendConfig& backend);

enum class Principality { Principal, NotPrincipal, Unknown };

struct PrincipalityVerdict {
  Principality status = Principality::Unknown;
  // Power-basis coordinates of a generator; denominators divide the index
  // (present iff Principal).  Norm is re-checked against the ideal norm on
  // every path that sets it.
  std::optional<std::vector<mpq_class>> generator;
  // Order of [I] in Cl_K; always present for NotPrincipal when the ideal
  // is a power of a degree-1 prime (every ideal this pipeline tests).
  std::optional<mpz_class> class_order;
  // For Unknown from the builtin search: the exhausted T2 radius^2.
  std::optional<mpz_class> search_bound;
};

// Principality of I (given coprime to the index).  declared answers only
// the trivial cases; oracle is definitive; builtin is exact for p = 3 and
// positive-certificate-only for p >= 5.
PrincipalityVerdict is_principal(const IdealHNF& ideal,
                                 const BackendConfig& backend);

enum class Tri { False, True, Unknown };

struct S0Evidence {
  Tri result = Tri::Unknown;
  mpz_class ell;
  mpz_class root;          // theta = root mod q
  mpz_class tested_power;  // e/p
  // Order of [q]; membership in S0 is equivalent to p^r | order.
  std::optional<mpz_class> class_order;
  // Set when the answer came from a direct principality test of q^(e/p).
  std::optional<PrincipalityVerdict> verdict;
};

// Membership of ell in S0, i.e. q^(e/p) not principal.  Caller guarantees
// ell in S.  Requires p | h (otherwise e/p is meaningless and the call
// throws std::invalid_argument).  A backend that cannot decide yields
// Tri::Unknown — the hunter files such ell as candidates.
S0Evidence in_s0(const mpz_class& ell, const ClassGroupData& cls,
                 const BackendConfig& backend);

struct PrincipalDensityEstimate {
  std::uint64_t X = 0;
  std::uint64_t sample = 0;     // degree-1 primes tested (norm <= X)
  std::uint64_t principal = 0;  // those with q^(e/p) principal
  mpq_class estimate;           // principal / sample
  mpq_class expected;           // 1/p^N
};

// Fraction of degree-1 primes q of norm ell <= X (ell != 1 mod p, ell
// coprime to p*c) with q^(e/p) principal.  Needs a deciding backend
// (oracle, or builtin with p = 3); an empty range throws
// std::runtime_error("empty sample").
PrincipalDensityEstimate empirical_principal_density(
    const ClassGroupData& cls, std::uint64_t X, const BackendConfig& backend);

}  // namespace hasse
