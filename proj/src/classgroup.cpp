#include "hasse/classgroup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "hasse/arith.hpp"
#include "hasse/cubic.hpp"
#include "hasse/lattice.hpp"
#include "hasse/oracle.hpp"

namespace hasse {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("backend failure: " + what);
}

// ---- backend sessions ----
// Oracle subprocesses and cubic engines are expensive; hunts issue many
// small queries, so both are kept alive per process, keyed by their
// configuration.  The cubic engine mutates internal caches and is guarded
// by its own mutex.

struct CubicSession {
  std::mutex mu;
  CubicClassGroup eng;
  explicit CubicSession(const mpz_class& c) : eng(c) {}
};

std::mutex g_sessions_mu;
std::map<std::string, std::unique_ptr<OracleClient>>& oracle_pool() {
  static auto* m = new std::map<std::string, std::unique_ptr<OracleClient>>;
  return *m;
}
std::map<std::string, std::shared_ptr<CubicSession>>& cubic_pool() {
  static auto* m = new std::map<std::string, std::shared_ptr<CubicSession>>;
  return *m;
}

OracleClient& oracle_for(const BackendConfig& b) {
  if (b.oracle_cmd.empty())
    fail("oracle backend selected without an oracle command");
  std::lock_guard<std::mutex> lk(g_sessions_mu);
  auto& slot = oracle_pool()[b.oracle_cmd + "\x1f" + b.oracle_cache];
  if (!slot)
    slot = std::make_unique<OracleClient>(b.oracle_cmd, b.oracle_cache);
  return *slot;
}

std::shared_ptr<CubicSession> cubic_for(const mpz_class& c) {
  std::lock_guard<std::mutex> lk(g_sessions_mu);
  auto& slot = cubic_pool()[c.get_str()];
  if (!slot) slot = std::make_shared<CubicSession>(c);
  return slot;
}

// ---- declared data ----

struct DeclaredPair {
  std::uint64_t p;
  const char* c;
  std::initializer_list<long> inv;
};

// Bundled pairs; the same table ships as data/class_groups.json, and the
// oracle backend (or the cubic engine, for p = 3) reproduces every row.
constexpr DeclaredPair kDeclared[] = {
    {3, "921", {3, 3}},  {5, "19", {5}},    {7, "13", {7}},
    {11, "373", {11, 11}}, {13, "103", {13}}, {17, "1087", {17}},
    {19, "37", {19}},
};

std::optional<std::vector<mpz_class>> declared_lookup(
    std::uint64_t p, const mpz_class& c, const std::string& path) {
  if (path.empty()) {
    for (const auto& row : kDeclared) {
      if (row.p == p && mpz_class(row.c) == c) {
        std::vector<mpz_class> inv;
        for (long d : row.inv) inv.push_back(d);
        return inv;
      }
    }
    return std::nullopt;
  }
  std::ifstream in(path);
  if (!in) fail("cannot read declared class-group table: " + path);
  json table;
  try {
    table = json::parse(in);
  } catch (const json::exception& e) {
    fail("declared class-group table is not valid JSON: " +
         std::string(e.what()));
  }
  if (!table.contains("pairs") || !table["pairs"].is_array())
    fail("declared class-group table lacks a \"pairs\" array");
  for (const auto& row : table["pairs"]) {
    mpz_class rc = row["c"].is_string()
                       ? mpz_class(row["c"].get<std::string>())
                       : mpz_class(row["c"].get<long>());
    if (row["p"].get<std::uint64_t>() != p || rc != c) continue;
    std::vector<mpz_class> inv;
    for (const auto& v : row["invariants"])
      inv.push_back(v.is_string() ? mpz_class(v.get<std::string>())
                                  : mpz_class(v.get<long>()));
    return inv;
  }
  return std::nullopt;
}

ClassGroupData finish_class_data(const PureFieldParams& field,
                                 std::vector<mpz_class> inv,
                                 Backend source) {
  std::sort(inv.begin(), inv.end());
  while (!inv.empty() && inv.front() == 1) inv.erase(inv.begin());
  for (size_t i = 0; i < inv.size(); ++i) {
    if (inv[i] < 2) fail("class-group invariant below 2");
    if (i + 1 < inv.size() && inv[i + 1] % inv[i] != 0)
      fail("class-group invariants are not a divisibility chain");
  }
  ClassGroupData out;
  out.field = field;
  out.invariants = inv;
  out.h = 1;
  for (const auto& d : inv) out.h *= d;
  out.e = inv.empty() ? mpz_class(1) : inv.back();
  out.r = static_cast<unsigned>(valuation(out.e, mpz_class(field.p)));
  out.N = 0;
  for (const auto& d : inv)
    if (valuation(d, mpz_class(field.p)) == static_cast<int>(out.r)) ++out.N;
  if (mpz_divisible_ui_p(out.h.get_mpz_t(), field.p) && out.N == 0)
    fail("inconsistent class data: p | h but no invariant carries p^r");
  out.source = backend_tag(source);
  return out;
}

// ---- builtin principality search, any degree ----
// Lattice of I under the real/complex embeddings (double precision seeds an
// mpf basis; the accept test |N(alpha)| = N(I) is exact).  A generator of
// T2 below the escalating radius is found; exhaustion is Unknown, never a
// negative.

PrincipalityVerdict generator_search(const IdealHNF& I) {
  const PureFieldParams& F = I.field;
  const size_t n = F.p;
  PrincipalityVerdict out;

  mpf_set_default_prec(256);
  double root = std::pow(F.c.get_d(), 1.0 / static_cast<double>(n));
  MatF rows(n, VecF(n));
  for (size_t i = 0; i < n; ++i) {  // column i of the HNF = generator g_i
    std::vector<double> v(n);
    for (size_t k = 0; k < n; ++k) v[k] = I.hnf.at(k, i).get_d();
    double re0 = 0;
    for (size_t k = 0; k < n; ++k) re0 += v[k] * std::pow(root, double(k));
    rows[i][0] = re0;
    for (size_t j = 1; j <= (n - 1) / 2; ++j) {
      double re = 0, im = 0;
      for (size_t k = 0; k < n; ++k) {
        double ang = 2.0 * M_PI * double(j) * double(k) / double(n);
        double mag = v[k] * std::pow(root, double(k));
        re += mag * std::cos(ang);
        im += mag * std::sin(ang);
      }
      rows[i][2 * j - 1] = re * std::sqrt(2.0);
      rows[i][2 * j] = im * std::sqrt(2.0);
    }
  }
  MatZ U;
  lll_reduce(rows, &U);

  // AM-GM floor for a generator: T2 >= n |N|^(2/n); units stretch it, so
  // escalate a few times before giving up.
  double base = double(n) * std::pow(I.norm.get_d(), 2.0 / double(n));
  double radius = base * 1.5;
  for (int round = 0; round < 6; ++round, radius *= 2) {
    std::optional<std::vector<mpz_class>> hit;
    enumerate_short_vectors(
        rows, mpf_class(radius), 2'000'000,
        [&](const std::vector<long>& x) {
          if (hit) return;
          std::vector<mpz_class> w(n, 0);
          for (size_t i = 0; i < n; ++i) {
            if (x[i] == 0) continue;
            for (size_t k = 0; k < n; ++k) {
              mpz_class coef = 0;
              for (size_t r2 = 0; r2 < n; ++r2)
                coef += U.at(i, r2) * I.hnf.at(k, r2);
              w[k] += x[i] * coef;
            }
          }
          mpz_class nw = element_norm(w, F);
          if (nw == I.norm || nw == -I.norm) hit = std::move(w);
        });
    if (hit) {
      out.status = Principality::Principal;
      std::vector<mpq_class> gen;
      for (const auto& v : *hit) gen.emplace_back(v);
      out.generator = std::move(gen);
      out.class_order = 1;
      return out;
    }
  }
  out.status = Principality::Unknown;
  out.search_bound = mpz_class(std::ceil(radius));
  return out;
}

// Order of [I] when I is detectably a power of a degree-1 prime; the
// oracle knows orders only for primes (ell, root).
std::optional<mpz_class> oracle_power_order(OracleClient& oc,
                                            const IdealHNF& I) {
  mpz_class nrm = I.norm;
  mpz_class ell;
  std::uint64_t k = 0;
  if (is_prime(nrm)) {
    ell = nrm;
    k = 1;
  } else {
    for (std::uint64_t kk = 2; kk <= 256; ++kk) {
      mpz_class rt, rem;
      mpz_rootrem(rt.get_mpz_t(), rem.get_mpz_t(), nrm.get_mpz_t(),
                  static_cast<unsigned long>(kk));
      if (rem == 0 && is_prime(rt)) {
        ell = rt;
        k = kk;
        break;
      }
      if (rt < 2) break;
    }
  }
  if (k == 0) return std::nullopt;
  PrimeIdealHNF q;
  try {
    q = prime_above_deg1(ell, I.field);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  if (!ideal_equal(ideal_pow(q.ideal, k), I)) return std::nullopt;
  mpz_class m = oc.ideal_class_order(I.field.p, I.field.c, ell, q.root);
  mpz_class g;
  mpz_gcd_ui(g.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(k));
  return m / g;
}

}  // namespace

const char* backend_tag(Backend kind) {
  switch (kind) {
    case Backend::Declared: return "declared";
    case Backend::Oracle: return "oracle";
    case Backend::Builtin: return "builtin";
  }
  return "?";
}

ClassGroupData class_data(const PureFieldParams& field,
                          const BackendConfig& backend) {
  switch (backend.kind) {
    case Backend::Declared: {
      auto inv = declared_lookup(field.p, field.c, backend.declared_path);
      if (!inv)
        fail("no declared class data for p = " + std::to_string(field.p) +
             ", c = " + field.c.get_str());
      return finish_class_data(field, *inv, Backend::Declared);
    }
    case Backend::Oracle: {
      auto inv = oracle_for(backend).class_group(field.p, field.c);
      return finish_class_data(field, inv, Backend::Oracle);
    }
    case Backend::Builtin: {
      if (field.p != 3)
        fail("builtin class-group engine is limited to p = 3");
      auto session = cubic_for(field.c);
      std::lock_guard<std::mutex> lk(session->mu);
      return finish_class_data(field, session->eng.invariants(),
                               Backend::Builtin);
    }
  }
  fail("unreachable backend kind");
}

PrincipalityVerdict is_principal(const IdealHNF& ideal,
                                 const BackendConfig& backend) {
  PrincipalityVerdict out;
  if (ideal.norm == 1) {
    out.status = Principality::Principal;
    std::vector<mpq_class> one(ideal.field.p, 0);
    one[0] = 1;
    out.generator = std::move(one);
    out.class_order = 1;
    return out;
  }
  switch (backend.kind) {
    case Backend::Declared:
      out.status = Principality::Unknown;
      return out;
    case Backend::Oracle: {
      OracleClient& oc = oracle_for(backend);
      auto ans = oc.is_principal(ideal.field.p, ideal.field.c, ideal.hnf);
      if (ans.principal) {
        // replay the norm: N(D*gen) must be +-N(I) * D^p
        const auto& gen = *ans.generator;
        if (gen.size() != ideal.field.p)
          fail("oracle generator has the wrong length");
        mpz_class den = 1;
        for (const auto& g : gen)
          mpz_lcm(den.get_mpz_t(), den.get_mpz_t(),
                  g.get_den().get_mpz_t());
        std::vector<mpz_class> w;
        for (const auto& g : gen) {
          mpq_class scaled = g * den;
          w.push_back(scaled.get_num());
        }
        mpz_class want = ideal.norm * pow_mpz(den, ideal.field.p);
        mpz_class got = element_norm(w, ideal.field);
        if (got != want && got != -want)
          fail("oracle generator fails the norm replay");
        if (den == 1 && !ideal_contains(ideal, w))
          fail("oracle generator is not in the ideal");
        out.status = Principality::Principal;
        out.generator = ans.generator;
        out.class_order = 1;
      } else {
        out.status = Principality::NotPrincipal;
        out.class_order = oracle_power_order(oc, ideal);
        if (out.class_order && *out.class_order <= 1)
          fail("oracle verdicts disagree: not principal but order 1");
      }
      return out;
    }
    case Backend::Builtin: {
      if (ideal.field.p == 3) {
        auto session = cubic_for(ideal.field.c);
        std::lock_guard<std::mutex> lk(session->mu);
        CubicClassGroup& eng = session->eng;
        OrderIdeal oi = to_order_ideal(eng.order(), ideal);
        auto dlog = eng.ideal_class_dlog(oi);
        if (!dlog) {
          out.status = Principality::Unknown;
          return out;
        }
        mpz_class ord = eng.class_order(*dlog);
        out.class_order = ord;
        if (ord == 1) {
          auto gen = eng.find_generator(oi);
          if (!gen) {
            out.status = Principality::Unknown;  // over-budget; stay honest
            out.class_order.reset();
            return out;
          }
          out.status = Principality::Principal;
          out.generator = std::move(gen);
        } else {
          out.status = Principality::NotPrincipal;
        }
        return out;
      }
      return generator_search(ideal);
    }
  }
  fail("unreachable backend kind");
}

S0Evidence in_s0(const mpz_class& ell, const ClassGroupData& cls,
                 const BackendConfig& backend) {
  const PureFieldParams& F = cls.field;
  if (cls.r == 0)
    throw std::invalid_argument(
        "in_s0: p does not divide the class number; e/p is undefined");
  PrimeIdealHNF q = prime_above_deg1(ell, F);

  S0Evidence ev;
  ev.ell = ell;
  ev.root = q.root;
  ev.tested_power = cls.e / F.p;
  mpz_class pr = pow_mpz(mpz_class(F.p), cls.r);  // p^r | ord([q]) <=> in S0

  switch (backend.kind) {
    case Backend::Declared:
      ev.result = Tri::Unknown;
      return ev;
    case Backend::Oracle: {
      mpz_class m = oracle_for(backend).ideal_class_order(F.p, F.c, ell,
                                                          q.root);
      if (!mpz_divisible_p(cls.h.get_mpz_t(), m.get_mpz_t()))
        fail("oracle class order does not divide the class number");
      ev.class_order = m;
      ev.result = mpz_divisible_p(m.get_mpz_t(), pr.get_mpz_t())
                      ? Tri::True
                      : Tri::False;
      return ev;
    }
    case Backend::Builtin: {
      if (F.p == 3) {
        auto session = cubic_for(F.c);
        std::lock_guard<std::mutex> lk(session->mu);
        CubicClassGroup& eng = session->eng;
        if (eng.invariants() != cls.invariants)
          fail("builtin class group disagrees with the supplied class data");
        CubicPrime P{ell, to_order_ideal(eng.order(), q.ideal)};
        auto dlog = eng.prime_class_dlog(P);
        if (!dlog) {
          ev.result = Tri::Unknown;
          return ev;
        }
        mpz_class m = eng.class_order(*dlog);
        ev.class_order = m;
        ev.result = mpz_divisible_p(m.get_mpz_t(), pr.get_mpz_t())
                        ? Tri::True
                        : Tri::False;
        return ev;
      }
      // best effort: certify "not in S0" through an explicit generator of
      // q^(e/p); exhaustion stays Unknown (no negative certificates here)
      mpz_class k = ev.tested_power;
      IdealHNF target = ideal_pow(q.ideal, k.get_ui());
      PrincipalityVerdict v = generator_search(target);
      ev.verdict = v;
      ev.result =
          v.status == Principality::Principal ? Tri::False : Tri::Unknown;
      return ev;
    }
  }
  fail("unreachable backend kind");
}

PrincipalDensityEstimate empirical_principal_density(
    const ClassGroupData& cls, std::uint64_t X, const BackendConfig& backend) {
  if (backend.kind == Backend::Declared)
    fail("declared backend has no principality test");
  if (X > 0xffffffffull)
    throw std::invalid_argument("empirical_principal_density: X too large");
  const PureFieldParams& F = cls.field;
  PrincipalDensityEstimate out;
  out.X = X;
  out.expected = mpq_class(1, pow_mpz(mpz_class(F.p), cls.N));
  for (std::uint32_t ell : primes_up_to(static_cast<std::uint32_t>(X))) {
    if (ell == F.p || ell % F.p == 1) continue;
    if (mpz_divisible_ui_p(F.c.get_mpz_t(), ell)) continue;
    S0Evidence ev = in_s0(mpz_class(ell), cls, backend);
    if (ev.result == Tri::Unknown)
      fail("principality undecided at ell = " + std::to_string(ell));
    ++out.sample;
    if (ev.result == Tri::False) ++out.principal;
  }
  if (out.sample == 0) throw std::runtime_error("empty sample");
  out.estimate = mpq_class(out.principal, out.sample);
  out.estimate.canonicalize();
  return out;
}

}  // namespace hasse
