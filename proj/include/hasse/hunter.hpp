#pragma once
// Pipeline orchestration.  analyze() settles whether a pair (p, c) is
// covered by the criterion (conditions on c, the class group, and the local
// density); hunt() then walks a prime range, certifying each ell whose
// curve x^p + ell y^p + c z^p = 0 is everywhere locally solvable yet has no
// rational point; verify replays emitted certificates field by field.
// Certificates and checkpoints are JSON ("v": 1), one object per line.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "hasse/classgroup.hpp"
#include "hasse/density.hpp"
#include "hasse/exceptional.hpp"
#include "hasse/field.hpp"
#include "hasse/local.hpp"

namespace hasse {

struct AnalysisReport {
  PureFieldParams field;
  ExceptionalSet exceptionals;
  std::optional<ClassGroupData> cls;
  std::optional<DensityCertificate> density;
  bool wieferich_ok = false;
  bool p_divides_h = false;
  bool density_passes = false;
  // conditions 1 and 2 hold and d > 1/p^N: infinitely many certified ell
  bool s0_infinite = false;
  std::vector<std::string> failed;  // names of the conditions that failed
};

// Backend problems (unreachable oracle, missing declared data) throw;
// failed mathematical conditions are reported by name instead.  cache_dir
// persists the exceptional-prime scan between runs ("" = recompute).
AnalysisReport analyze(std::uint64_t p, const mpz_class& c,
                       const BackendConfig& backend,
                       const std::string& cache_dir = "");

enum class VerificationLevel { LocalOnly, Full };

// Everything needed to recheck one counterexample from scratch.  LocalOnly
// records (candidates) carry the same local evidence but an undecided
// principality verdict; Full requires the non-principality evidence.
struct CounterexampleCertificate {
  std::uint64_t p = 0;
  mpz_class c;
  mpz_class ell;
  LocalReport local;
  DedekindCheck not_index_divisor;
  mpz_class root;  // the p-th root of c mod ell
  ClassGroupData cls;
  S0Evidence s0;
  bool wieferich_ok = false;
  bool p_divides_h = false;
  VerificationLevel level = VerificationLevel::LocalOnly;
};

struct HuntState {
  std::uint64_t p = 0;
  mpz_class c;
  mpz_class lo, hi;
  std::optional<std::pair<mpz_class, mpz_class>> class_filter;  // (a, M)
  std::string backend;  // tag
  mpz_class cursor;     // last ell fully processed (checkpoint boundary)
  std::uint64_t candidates_in_s = 0;  // members of S seen
  std::uint64_t confirmed_s0 = 0;     // full certificates emitted
  std::uint64_t unknown = 0;          // candidate records emitted
  std::optional<mpz_class> min_confirmed, max_confirmed;
};

struct HuntOptions {
  mpz_class lo = 2;
  mpz_class hi = 0;  // inclusive; required
  std::optional<std::pair<mpz_class, mpz_class>> class_filter;
  unsigned jobs = 1;       // worker threads over disjoint intervals
  bool force = false;      // hunt even when analyze says no
  std::string out_path;         // confirmed certificates (JSONL)
  std::string candidates_path;  // Unknown-principality records (JSONL)
  std::string checkpoint_path;  // resumable cursor + counters (JSON)
  std::string cache_dir;        // exceptional-set cache
};

// Walks primes in [lo, hi] (restricted to ell = a mod M when filtered),
// skipping ell outside S; emits a Full certificate per confirmed ell and a
// LocalOnly record per Unknown.  Deterministic: output order is ascending
// ell regardless of jobs.  With a checkpoint path, a matching previous run
// resumes after its cursor; a parameter mismatch throws.  The optional
// callback sees every emitted record (confirmed and candidates) in order.
HuntState hunt(std::uint64_t p, const mpz_class& c,
               const BackendConfig& backend, const HuntOptions& opt,
               const std::function<void(const CounterexampleCertificate&)>&
                   emit = nullptr);

struct VerifyOutcome {
  bool ok = true;
  std::vector<std::string> failures;  // human-readable, one per failed field
};

// Replays every replayable field: primality and congruence conditions,
// Dedekind transcript, the p-th root, every local check and witness,
// class-data arithmetic, and the S0 evidence at the stated level.  With a
// backend, class data and the principality verdict are recomputed too.
VerifyOutcome verify_certificate(const CounterexampleCertificate& cert,
                                 const BackendConfig* backend = nullptr,
                                 const std::string& cache_dir = "");

// ---- JSON (schema version "v": 1) ----

std::string certificate_json(const CounterexampleCertificate& cert);
CounterexampleCertificate certificate_from_json(const std::string& line);

std::string analysis_json(const AnalysisReport& report);
std::string hunt_state_json(const HuntState& st);
std::string density_json(const DensityCertificate& cert);
std::string exceptional_json(const ExceptionalSet& set);
std::string local_report_json(const LocalReport& rep);
std::string chebotarev_json(const ChebotarevReport& rep);

}  // namespace hasse
