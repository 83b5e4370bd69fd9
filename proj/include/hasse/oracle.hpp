#pragma once
// Bridge to an external computer-algebra process over JSON lines: one
// request object per line on the child's stdin, one response per line on
// its stdout.  Used for class-group data and principality tests that the
// builtin engines cannot certify.  Replies are cached on disk so repeated
// hunts over the same range cost one subprocess round-trip per new prime.
//
// Wire format (ids are per-connection sequence numbers):
//   {"id": n, "op": "class_group", "p": p, "c": c}
//     -> {"id": n, "ok": true, "invariants": [d1, ...]}
//   {"id": n, "op": "ideal_class_order", "p": p, "c": c, "ell": l, "root": a}
//     -> {"id": n, "ok": true, "order": m}
//   {"id": n, "op": "is_principal", "p": p, "c": c, "hnf": [[...], ...]}
//     -> {"id": n, "ok": true, "principal": bool, "generator": [..] | null}
//   any failure -> {"id": n, "ok": false, "error": "..."}
// Integers too large for doubles travel as decimal strings; generator
// coordinates may be rationals ("num/den").

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "hasse/linalg.hpp"

namespace hasse {

class OracleClient {
 public:
  // command is run through /bin/sh -c.  cache_dir empty disables caching.
  // Connections are lazy: nothing is spawned until the first request, and
  // concurrent requests each get their own child (a small pool, one
  // in-flight request per connection).
  explicit OracleClient(std::string command, std::string cache_dir = "");
  ~OracleClient();

  OracleClient(const OracleClient&) = delete;
  OracleClient& operator=(const OracleClient&) = delete;

  // Cyclic invariants d1 | d2 | ... of Cl_K, ascending, 1s dropped.
  std::vector<mpz_class> class_group(std::uint64_t p, const mpz_class& c);

  // Order of [q] in Cl_K for the degree-1 prime q = (ell, theta - root).
  mpz_class ideal_class_order(std::uint64_t p, const mpz_class& c,
                              const mpz_class& ell, const mpz_class& root);

  struct Principality {
    bool principal;
    // Power-basis coordinates of a generator (maximal-order elements may
    // have denominators dividing the index).  Present iff principal.
    std::optional<std::vector<mpq_class>> generator;
  };
  Principality is_principal(std::uint64_t p, const mpz_class& c,
                            const MatZ& hnf);

  const std::string& command() const { return command_; }

 private:
  struct Conn;

  Conn* acquire();
  void release(Conn* conn);
  void destroy(Conn* conn);

  // One round-trip.  key names the cache entry ("" = don't cache).
  // Throws std::runtime_error("backend failure: ...") on any protocol or
  // process error.
  std::string call(const std::string& body, const std::string& key);

  std::string command_;
  std::string cache_dir_;
  std::mutex mu_;
  std::vector<Conn*> all_;
  std::vector<Conn*> free_;
};

}  // namespace hasse
