#pragma once
// Exceptional primes for an exponent p: primes q != p such that some
// diagonal curve a x^p + b y^p + c z^p = 0 (nonzero coefficients) has no
// projective F_q-point.  Such q necessarily satisfy q = 1 (mod p), and the
// Weil estimate confines them to q < ((p-1)(p-2))^2, so a finite scan
// decides the whole set.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hasse {

// ((p-1)(p-2))^2; no prime at or above this can be exceptional for p.
std::uint64_t weil_bound(std::uint64_t p);

struct ExceptionalSet {
  std::uint64_t p = 0;
  std::uint64_t bound = 0;                // weil_bound(p) at scan time
  std::vector<std::uint32_t> primes;      // ascending
  // q -> class exponents (i, j): the curve x^p + g^i y^p + g^j z^p has zero
  // F_q-points, with g the smallest primitive root mod q.
  std::map<std::uint32_t, std::array<std::uint32_t, 2>> witnesses;
};

// Witness pair (i, j) if q is exceptional for p, else nullopt.  Requires
// q != p and both prime; q != 1 (mod p) answers immediately (power map is
// onto, every curve has points).
std::optional<std::array<std::uint32_t, 2>> is_exceptional(std::uint32_t q,
                                                           std::uint64_t p);

// Replay: true iff (1, g^i, g^j) really has zero F_q-points.
bool verify_exceptional_witness(std::uint32_t q, std::uint64_t p,
                                const std::array<std::uint32_t, 2>& w);

// Full scan of primes q = 1 (mod p), q < weil_bound(p).  threads = 0 means
// hardware concurrency.
ExceptionalSet exceptional_primes(std::uint64_t p, unsigned threads = 0);

// Disk-backed variant: `<cache_dir>/exceptional_p<p>.json`.  A present file
// is checked (field consistency + witness replay) and trusted if it passes;
// absent, unreadable, stale or failing files are recomputed and rewritten
// (write to temp, then rename).  refresh forces recomputation.
ExceptionalSet exceptional_primes_cached(std::uint64_t p,
                                         const std::string& cache_dir,
                                         bool refresh = false,
                                         unsigned threads = 0);

}  // namespace hasse
