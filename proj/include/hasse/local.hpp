#pragma once
// Local solvability of diagonal curves a x^p + b y^p + c z^p = 0:
// point counts over F_q (cyclotomic-number histogram), a Q_q decision
// procedure (fast paths + Hensel-accepted BFS over primitive triples mod
// q^k), admissible residue classes, and aggregated obstruction reports.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

namespace hasse {

// The projective curve a x^p + b y^p + c z^p = 0 (p an odd prime,
// coefficients nonzero).
struct DiagonalCurve {
  std::uint64_t p;
  mpz_class a, b, c;
};

// ---- counting over F_q ----

// p-th-power class data for F_q: discrete logs mod d = gcd(p, q-1) and the
// pair histogram T[i][j] = #{s in F_q \ {0,1}: cls(s) = i, cls(1-s) = j}.
// Build once per (q, d) in O(q); each projective count is then O(1).
class PowerClassTable {
 public:
  PowerClassTable(std::uint32_t q, std::uint64_t p);

  std::uint32_t q() const { return q_; }
  std::uint32_t d() const { return d_; }

  // #points of a x^p + b y^p + c z^p = 0 in P^2(F_q); requires q !| abc.
  std::uint64_t count(std::uint64_t a, std::uint64_t b, std::uint64_t c) const;

  // Some affine point (x0,y0,z0) != 0 of the curve, if one exists.
  std::optional<std::array<std::uint32_t, 3>> find_point(
      std::uint64_t a, std::uint64_t b, std::uint64_t c) const;

  // class index of unit x (1 <= x < q)
  std::uint32_t cls(std::uint32_t x) const { return cls_[x]; }
  // some z with z^p = t (unit t), or nullopt
  std::optional<std::uint32_t> pth_root(std::uint32_t t) const;

 private:
  std::uint32_t q_, d_, g_, iota_;
  std::uint64_t p_;
  std::vector<std::uint8_t> cls_;    // dlog mod d, index 1..q-1
  std::vector<std::uint32_t> dlog_;  // full dlog, for root extraction
  std::vector<std::uint32_t> pair_;  // d x d histogram
};

// Convenience (builds the table): #points in P^2(F_q), requires q !| abc.
std::uint64_t count_points_fq(const DiagonalCurve& c, std::uint32_t q);

// ---- solvability over Q_q ----

// An accepted approximate solution: f(x,y,z) = 0 (mod q^level), coordinate
// `coord` is exactly divisible by q^v with s = v_q(p * a_coord) + (p-1) v
// and 2s + 1 <= level, so one-variable Hensel lifts it to Z_q.  The triple
// refers to the q-normalized curve (see normalize_at_q).
struct HenselWitness {
  mpz_class x, y, z;
  int level;
  int coord;
  int s;
};

enum class LocalMethod {
  BijectiveRoot,  // q != 1 mod p: power map is onto
  WeilBound,      // (q+1)^2 > (p-1)^2 (p-2)^2 q forces an F_q point
  FqCount,        // exact F_q count (small q = 1 mod p, unit coefficients)
  Bfs,            // tree search over primitive triples mod q^k
};

struct QpResult {
  bool solvable;
  LocalMethod method;
  std::optional<HenselWitness> witness;  // present iff solvable
  int exhausted_level = 0;  // K_max at which the tree died (BFS insolvable)
};

// Coefficients with q-valuations brought into {0..p-1}, minimum 0 (q^p
// absorbed into variables, common q-powers divided out).  Verdicts and
// witnesses are invariant under this transform.
std::array<mpz_class, 3> normalize_at_q(const DiagonalCurve& c,
                                        std::uint64_t q);

// Decides whether the curve has a point over Q_q (q prime).
QpResult solvable_qq(const DiagonalCurve& c, std::uint64_t q);

// Replay check for a solvable verdict's witness.
bool verify_hensel_witness(const DiagonalCurve& c, std::uint64_t q,
                           const HenselWitness& w);

// Admissible residues t for x^p + t y^p + c z^p = 0 over Q_q.  Modulus is
// p^2 when q = p (unit residues with t mod p != 1), else q (all unit
// residues).  Verdicts depend only on the class of a prime t' = t.
std::vector<std::uint64_t> solvable_classes(std::uint64_t p,
                                            const mpz_class& c,
                                            std::uint64_t q);

// ---- aggregated report ----

struct LocalCheck {
  std::uint64_t q;
  QpResult result;
};

struct LocalReport {
  bool no_obstruction;
  std::vector<std::uint64_t> checked;           // ascending, deduplicated
  std::optional<std::uint64_t> obstructed_at;   // smallest failing q
  std::vector<LocalCheck> checks;
};

// Solvability of x^p + ell y^p + c z^p at every q in
// {p} u {prime divisors of c} u {ell} u exceptionals.
// Preconditions: ell prime, ell != p, ell !| c, ell != 1 (mod p); violations
// throw std::invalid_argument("ell outside hunt domain").
LocalReport obstruction_report(std::uint64_t p, const mpz_class& ell,
                               const mpz_class& c,
                               const std::vector<std::uint32_t>& exceptionals);

// Budget guard for the BFS (nodes); pathological inputs throw rather than
// thrash.
inline constexpr std::uint64_t kLocalSearchBudget = 6'000'000;

}  // namespace hasse
