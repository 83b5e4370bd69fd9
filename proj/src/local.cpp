#include "hasse/local.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "hasse/arith.hpp"

namespace hasse {

namespace {

std::uint64_t mod_u(const mpz_class& v, std::uint64_t m) {
  mpz_class r = v % mpz_class(static_cast<unsigned long>(m));
  if (r < 0) r += static_cast<unsigned long>(m);
  return r.get_ui();
}

void validate_curve(const DiagonalCurve& c) {
  if (c.p < 3 || !is_prime_u64(c.p))
    throw std::invalid_argument("curve: exponent must be an odd prime");
  if (c.a == 0 || c.b == 0 || c.c == 0)
    throw std::invalid_argument("curve: zero coefficient");
}

}  // namespace

// ---- PowerClassTable ----

PowerClassTable::PowerClassTable(std::uint32_t q, std::uint64_t p)
    : q_(q), p_(p) {
  if (!is_prime_u64(q))
    throw std::invalid_argument("PowerClassTable: q not prime");
  d_ = static_cast<std::uint32_t>(std::gcd<std::uint64_t>(p, q - 1));
  g_ = (q == 2) ? 1 : primitive_root(q);
  cls_.assign(q, 0);
  dlog_.assign(q, 0);
  std::uint64_t x = 1;
  for (std::uint32_t k = 0; k + 1 < q; ++k) {
    dlog_[x] = k;
    cls_[x] = static_cast<std::uint8_t>(k % d_);
    x = x * g_ % q;
  }
  iota_ = ((q - 1) / 2) % d_;  // dlog class of -1
  pair_.assign(static_cast<std::size_t>(d_) * d_, 0);
  for (std::uint32_t s = 2; s < q; ++s)
    pair_[cls_[s] * d_ + cls_[q + 1 - s]] += 1;
}

std::uint64_t PowerClassTable::count(std::uint64_t a, std::uint64_t b,
                                     std::uint64_t c) const {
  a %= q_;
  b %= q_;
  c %= q_;
  if (a == 0 || b == 0 || c == 0)
    throw std::invalid_argument("count: coefficient divisible by q");
  auto m = [&](long long v) {
    long long r = v % d_;
    return static_cast<std::uint32_t>(r < 0 ? r + d_ : r);
  };
  std::uint32_t ia = cls_[a], ib = cls_[b], ic = cls_[c];
  // points with all coordinates nonzero, via the pair histogram
  std::uint32_t i0 = m(static_cast<long long>(ia) - iota_ - ic);
  std::uint32_t j0 = m(static_cast<long long>(ib) - iota_ - ic);
  std::uint64_t total =
      static_cast<std::uint64_t>(d_) * d_ * pair_[i0 * d_ + j0];
  // one zero coordinate: binary forms with bijectivity count d each
  total += static_cast<std::uint64_t>(d_) *
           ((m(static_cast<long long>(iota_) + ib - ia) == 0) +
            (m(static_cast<long long>(iota_) + ic - ib) == 0) +
            (m(static_cast<long long>(iota_) + ic - ia) == 0));
  return total;
}

std::optional<std::uint32_t> PowerClassTable::pth_root(std::uint32_t t) const {
  if (t == 0 || t >= q_) return std::nullopt;
  if (q_ == 2) return 1;
  if (cls_[t] != 0) return std::nullopt;
  std::uint64_t n = q_ - 1;
  std::uint64_t nd = n / d_;
  // solve p*k = dlog(t) (mod q-1); d = gcd(p, q-1) divides dlog(t)
  std::uint64_t k =
      mulmod(dlog_[t] / d_, invmod((p_ / d_) % nd, nd), nd);
  return static_cast<std::uint32_t>(powmod(g_, k, q_));
}

std::optional<std::array<std::uint32_t, 3>> PowerClassTable::find_point(
    std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  a %= q_;
  b %= q_;
  c %= q_;
  std::uint64_t cinv = invmod(c, q_);
  for (std::uint32_t y = 0; y < q_; ++y) {
    std::uint64_t w =
        mulmod((q_ - (a + mulmod(b, powmod(y, p_, q_), q_) % q_) % q_) % q_,
               cinv, q_);
    if (w == 0) return std::array<std::uint32_t, 3>{1, y, 0};
    if (auto z = pth_root(static_cast<std::uint32_t>(w)))
      return std::array<std::uint32_t, 3>{1, y, *z};
  }
  // x = 0 face: b y^p + c z^p = 0 with y = 1
  std::uint64_t w = mulmod((q_ - b) % q_, cinv, q_);
  if (w != 0)
    if (auto z = pth_root(static_cast<std::uint32_t>(w)))
      return std::array<std::uint32_t, 3>{0, 1, *z};
  return std::nullopt;
}

std::uint64_t count_points_fq(const DiagonalCurve& c, std::uint32_t q) {
  validate_curve(c);
  PowerClassTable t(q, c.p);
  return t.count(mod_u(c.a, q), mod_u(c.b, q), mod_u(c.c, q));
}

// ---- q-adic normalization ----

std::array<mpz_class, 3> normalize_at_q(const DiagonalCurve& c,
                                        std::uint64_t q) {
  validate_curve(c);
  mpz_class Q = static_cast<unsigned long>(q);
  std::array<mpz_class, 3> out{c.a, c.b, c.c};
  std::array<int, 3> v{};
  for (int i = 0; i < 3; ++i) {
    v[i] = valuation(out[i], Q);
    int strip = v[i] - v[i] % static_cast<int>(c.p);  // absorb q^p into vars
    if (strip > 0) out[i] /= pow_mpz(Q, strip);
    v[i] %= static_cast<int>(c.p);
  }
  int m = std::min({v[0], v[1], v[2]});
  if (m > 0) {
    mpz_class qm = pow_mpz(Q, m);
    for (auto& x : out) x /= qm;
  }
  return out;
}

// ---- BFS over primitive triples mod q^k ----

namespace {

struct BfsParams {
  std::uint64_t p, q;
  int kmax;
  std::array<mpz_class, 3> coef;  // normalized at q
  std::array<int, 3> s_coef;      // v_q(p * coef_i)
};

// lane-generic helpers
inline std::uint64_t zz_pow(std::uint64_t b, std::uint64_t e,
                            std::uint64_t m) {
  return powmod(b, e, m);
}
inline mpz_class zz_pow(const mpz_class& b, std::uint64_t e,
                        const mpz_class& m) {
  mpz_class r;
  mpz_powm_ui(r.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(e),
              m.get_mpz_t());
  return r;
}
inline std::uint64_t zz_mul(std::uint64_t a, std::uint64_t b,
                            std::uint64_t m) {
  return mulmod(a, b, m);
}
inline mpz_class zz_mul(const mpz_class& a, const mpz_class& b,
                        const mpz_class& m) {
  return a * b % m;
}
inline std::uint64_t zz_reduce(const mpz_class& v, std::uint64_t m) {
  return mod_u(v, m);
}
inline mpz_class zz_reduce(const mpz_class& v, const mpz_class& m) {
  mpz_class r = v % m;
  if (r < 0) r += m;
  return r;
}
inline std::uint64_t zz_to_u64_mod(std::uint64_t v, std::uint64_t q) {
  return v % q;
}
inline std::uint64_t zz_to_u64_mod(const mpz_class& v, std::uint64_t q) {
  return mod_u(v, q);
}
inline mpz_class zz_to_mpz(std::uint64_t v) {
  return mpz_class(static_cast<unsigned long>(v));
}
inline mpz_class zz_to_mpz(const mpz_class& v) { return v; }

template <class Z>
struct BfsNode {
  std::array<Z, 3> v;
  std::uint8_t pin;  // first unit coordinate (stable under extension)
  bool operator<(const BfsNode& o) const { return v < o.v; }
};

template <class Z>
QpResult bfs_lane(const BfsParams& P) {
  const std::uint64_t q = P.q, p = P.p;
  const int kmax = P.kmax;
  std::vector<Z> qpow(kmax + 1);
  qpow[0] = Z(1);
  for (int k = 1; k <= kmax; ++k) qpow[k] = qpow[k - 1] * Z(q);

  std::array<Z, 3> coef;
  std::array<std::uint64_t, 3> cq;  // coefficients mod q
  for (int i = 0; i < 3; ++i) {
    coef[i] = zz_reduce(P.coef[i], qpow[kmax]);
    cq[i] = zz_to_u64_mod(coef[i], q);
  }

  std::uint64_t nodes = 0;
  auto charge = [&](std::uint64_t n) {
    nodes += n;
    if (nodes > kLocalSearchBudget)
      throw std::runtime_error("local search budget exceeded");
  };

  auto f_eval = [&](const BfsNode<Z>& n, int k) -> Z {
    const Z& m = qpow[k];
    Z s = Z(0);
    for (int i = 0; i < 3; ++i)
      s = s + zz_mul(zz_reduce(zz_to_mpz(coef[i]), m), zz_pow(n.v[i], p, m), m);
    return zz_reduce(zz_to_mpz(s), m);
  };

  auto accept = [&](const BfsNode<Z>& n, int k) -> std::optional<HenselWitness> {
    for (int i = 0; i < 3; ++i) {
      if (n.v[i] == Z(0)) continue;
      int v = 0;
      Z x = n.v[i];
      while (zz_to_u64_mod(x, q) == 0) {
        x = x / Z(q);
        ++v;
      }
      int s = P.s_coef[i] + static_cast<int>(p - 1) * v;
      if (2 * s + 1 <= k)
        return HenselWitness{zz_to_mpz(n.v[0]), zz_to_mpz(n.v[1]),
                             zz_to_mpz(n.v[2]), k, i, s};
    }
    return std::nullopt;
  };

  // level 1: canonical families (1,y,z), (0,1,z), (0,0,1)
  std::vector<std::vector<std::uint32_t>> zmap(q);
  for (std::uint64_t z = 0; z < q; ++z)
    zmap[zz_mul(cq[2], powmod(z, p, q), q)].push_back(
        static_cast<std::uint32_t>(z));

  std::vector<BfsNode<Z>> frontier;
  auto seed = [&](BfsNode<Z> n) -> std::optional<HenselWitness> {
    charge(1);
    if (auto w = accept(n, 1)) return w;
    frontier.push_back(std::move(n));
    return std::nullopt;
  };

  for (std::uint64_t y = 0; y < q; ++y) {
    std::uint64_t need =
        (q - (cq[0] + zz_mul(cq[1], powmod(y, p, q), q)) % q) % q;
    for (std::uint32_t z : zmap[need])
      if (auto w = seed(BfsNode<Z>{{Z(1), Z(y), Z(z)}, 0}))
        return {true, LocalMethod::Bfs, *w, 0};
  }
  {
    std::uint64_t need = (q - cq[1]) % q;
    for (std::uint32_t z : zmap[need])
      if (auto w = seed(BfsNode<Z>{{Z(0), Z(1), Z(z)}, 1}))
        return {true, LocalMethod::Bfs, *w, 0};
    if (cq[2] == 0)
      if (auto w = seed(BfsNode<Z>{{Z(0), Z(0), Z(1)}, 2}))
        return {true, LocalMethod::Bfs, *w, 0};
  }

  for (int k = 1; k < kmax && !frontier.empty(); ++k) {
    std::vector<BfsNode<Z>> next;
    // distinct (d1,d2) give distinct children and parents differ mod q^k,
    // so the frontier stays duplicate-free without a seen-set
    auto emit = [&](BfsNode<Z> child) -> std::optional<HenselWitness> {
      charge(1);
      if (auto w = accept(child, k + 1)) return w;
      if (k + 1 < kmax) next.push_back(std::move(child));
      return std::nullopt;
    };

    for (const auto& node : frontier) {
      Z fk1 = f_eval(node, k + 1);
      std::uint64_t F;
      {
        Z quo = fk1 / qpow[k];  // exact: node is viable at level k
        F = zz_to_u64_mod(quo, q);
      }
      int i1 = -1, i2 = -1;
      for (int i = 0; i < 3; ++i)
        if (i != node.pin) (i1 < 0 ? i1 : i2) = i;
      auto deriv = [&](int i) {
        std::uint64_t xr = zz_to_u64_mod(node.v[i], q);
        return mulmod(mulmod(p % q, cq[i], q), powmod(xr, p - 1, q), q);
      };
      std::uint64_t D1 = deriv(i1), D2 = deriv(i2);

      auto make_child = [&](std::uint64_t d1, std::uint64_t d2) {
        BfsNode<Z> c = node;
        c.v[i1] = c.v[i1] + qpow[k] * Z(d1);
        c.v[i2] = c.v[i2] + qpow[k] * Z(d2);
        return c;
      };

      if (D1 == 0 && D2 == 0) {
        if (F != 0) continue;  // uniformly dead
        for (std::uint64_t d1 = 0; d1 < q; ++d1)
          for (std::uint64_t d2 = 0; d2 < q; ++d2)
            if (auto w = emit(make_child(d1, d2)))
              return {true, LocalMethod::Bfs, *w, 0};
      } else if (D1 != 0) {
        std::uint64_t inv = invmod(D1, q);
        for (std::uint64_t d2 = 0; d2 < q; ++d2) {
          std::uint64_t rhs = (q - (F + mulmod(D2, d2, q)) % q) % q;
          if (auto w = emit(make_child(mulmod(rhs, inv, q), d2)))
            return {true, LocalMethod::Bfs, *w, 0};
        }
      } else {
        std::uint64_t inv = invmod(D2, q);
        for (std::uint64_t d1 = 0; d1 < q; ++d1) {
          std::uint64_t rhs = (q - F % q) % q;
          if (auto w = emit(make_child(d1, mulmod(rhs, inv, q))))
            return {true, LocalMethod::Bfs, *w, 0};
        }
      }
    }
    frontier = std::move(next);
  }
  return {false, LocalMethod::Bfs, std::nullopt, kmax};
}

}  // namespace

// ---- Q_q decision ----

QpResult solvable_qq(const DiagonalCurve& curve, std::uint64_t q) {
  validate_curve(curve);
  if (!is_prime_u64(q)) throw std::invalid_argument("solvable_qq: q not prime");
  const std::uint64_t p = curve.p;
  auto nc = normalize_at_q(curve, q);
  std::array<std::uint64_t, 3> r{mod_u(nc[0], q), mod_u(nc[1], q),
                                 mod_u(nc[2], q)};
  int units = (r[0] != 0) + (r[1] != 0) + (r[2] != 0);

  if (q != p && units == 3) {
    if ((q - 1) % p != 0) {
      // power map bijective: fix x = y = 1, solve for z
      std::uint64_t w =
          mulmod((q - (r[0] + r[1]) % q) % q, invmod(r[2], q), q);
      std::uint64_t z = w == 0 ? 0 : *pth_root_mod_prime(w, p, q);
      return {true, LocalMethod::BijectiveRoot,
              HenselWitness{1, 1, static_cast<unsigned long>(z), 1, 0, 0}, 0};
    }
    // Weil: (q+1)^2 > (p-1)^2 (p-2)^2 q forces a smooth F_q point
    unsigned __int128 lhs =
        static_cast<unsigned __int128>(q + 1) * (q + 1);
    unsigned __int128 rhs = static_cast<unsigned __int128>((p - 1) * (p - 1)) *
                            ((p - 2) * (p - 2)) * q;
    if (lhs > rhs) {
      std::uint64_t cinv = invmod(r[2], q);
      for (std::uint64_t y = 0; y < q; ++y) {
        std::uint64_t w = mulmod(
            (q - (r[0] + mulmod(r[1], powmod(y, p, q), q)) % q) % q, cinv, q);
        if (w == 0)
          return {true, LocalMethod::WeilBound,
                  HenselWitness{1, static_cast<unsigned long>(y), 0, 1, 0, 0},
                  0};
        if (auto z = pth_root_mod_prime(w, p, q))
          return {true, LocalMethod::WeilBound,
                  HenselWitness{1, static_cast<unsigned long>(y),
                                static_cast<unsigned long>(*z), 1, 0, 0},
                  0};
      }
      // small q only: every guaranteed point can sit on the x = 0 line
      // (at most p of them), so solve c z^p = -b there
      if (auto z = pth_root_mod_prime(mulmod(q - r[1], cinv, q), p, q))
        return {true, LocalMethod::WeilBound,
                HenselWitness{0, 1, static_cast<unsigned long>(*z), 1, 1, 0},
                0};
      throw std::logic_error("weil witness scan failed");
    }
    // small q = 1 mod p: exact count decides (smooth curve)
    if (q < (1u << 22)) {
      PowerClassTable tab(static_cast<std::uint32_t>(q), p);
      if (auto pt = tab.find_point(r[0], r[1], r[2])) {
        auto [x, y, z] = *pt;
        int coord = x ? 0 : (y ? 1 : 2);
        return {true, LocalMethod::FqCount,
                HenselWitness{static_cast<unsigned long>(x),
                              static_cast<unsigned long>(y),
                              static_cast<unsigned long>(z), 1, coord, 0},
                0};
      }
      return {false, LocalMethod::FqCount, std::nullopt, 1};
    }
  }

  if (q != p && units == 2 && (q - 1) % p != 0) {
    // exactly one coefficient divisible by q: bijective binary form
    int t = r[0] == 0 ? 0 : (r[1] == 0 ? 1 : 2);
    int u = (t + 1) % 3, v = (t + 2) % 3;
    std::uint64_t w = mulmod((q - r[u]) % q, invmod(r[v], q), q);
    std::uint64_t z = *pth_root_mod_prime(w, p, q);
    std::array<std::uint64_t, 3> pt{};
    pt[t] = 0;
    pt[u] = 1;
    pt[v] = z;
    return {true, LocalMethod::BijectiveRoot,
            HenselWitness{static_cast<unsigned long>(pt[0]),
                          static_cast<unsigned long>(pt[1]),
                          static_cast<unsigned long>(pt[2]), 1, u, 0},
            0};
  }

  // general tree search
  if (q > (1u << 22))
    throw std::invalid_argument("solvable_qq: q too large for tree search");
  BfsParams P;
  P.p = p;
  P.q = q;
  P.coef = nc;
  int vq_p = (q == p) ? 1 : 0;
  P.kmax = 2 * vq_p + 2 * static_cast<int>(p - 1) + 1;
  for (int i = 0; i < 3; ++i)
    P.s_coef[i] =
        vq_p + valuation(nc[i], mpz_class(static_cast<unsigned long>(q)));
  // lane: 64-bit when q^kmax stays below 2^62
  mpz_class cap = pow_mpz(mpz_class(static_cast<unsigned long>(q)),
                          static_cast<unsigned long>(P.kmax));
  if (mpz_sizeinbase(cap.get_mpz_t(), 2) <= 62) return bfs_lane<std::uint64_t>(P);
  return bfs_lane<mpz_class>(P);
}

bool verify_hensel_witness(const DiagonalCurve& curve, std::uint64_t q,
                           const HenselWitness& w) {
  validate_curve(curve);
  if (w.level < 1 || w.coord < 0 || w.coord > 2 || w.s < 0) return false;
  if (2 * w.s + 1 > w.level) return false;
  auto nc = normalize_at_q(curve, q);
  mpz_class Q = static_cast<unsigned long>(q);
  mpz_class m = pow_mpz(Q, w.level);
  std::array<mpz_class, 3> x{w.x % m, w.y % m, w.z % m};
  for (auto& xi : x)
    if (xi < 0) xi += m;
  mpz_class f = 0;
  for (int i = 0; i < 3; ++i) {
    mpz_class t;
    mpz_powm_ui(t.get_mpz_t(), x[i].get_mpz_t(),
                static_cast<unsigned long>(curve.p), m.get_mpz_t());
    f += nc[i] % m * t;
  }
  if (f % m != 0) return false;
  if (x[w.coord] == 0) return false;
  int v = valuation(x[w.coord], Q);
  int s = (q == curve.p ? 1 : 0) + valuation(nc[w.coord], Q) +
          static_cast<int>(curve.p - 1) * v;
  return s == w.s;
}

// ---- classes and reports ----

std::vector<std::uint64_t> solvable_classes(std::uint64_t p,
                                            const mpz_class& c,
                                            std::uint64_t q) {
  if (!is_prime_u64(p) || p < 3)
    throw std::invalid_argument("solvable_classes: p must be an odd prime");
  if (!is_prime_u64(q))
    throw std::invalid_argument("solvable_classes: q not prime");
  std::vector<std::uint64_t> out;
  if (q == p) {
    std::uint64_t mod = p * p;
    for (std::uint64_t t = 2; t < mod; ++t) {
      if (t % p == 0 || t % p == 1) continue;
      DiagonalCurve cur{p, 1, mpz_class(static_cast<unsigned long>(t)), c};
      if (solvable_qq(cur, q).solvable) out.push_back(t);
    }
    return out;
  }
  if (mod_u(c, q) == 0) {
    for (std::uint64_t t = 1; t < q; ++t) {
      DiagonalCurve cur{p, 1, mpz_class(static_cast<unsigned long>(t)), c};
      if (solvable_qq(cur, q).solvable) out.push_back(t);
    }
    return out;
  }
  // q coprime to p*c: one shared table, exact counts decide
  if (q >= (1u << 22))
    throw std::invalid_argument("solvable_classes: q too large");
  PowerClassTable tab(static_cast<std::uint32_t>(q), p);
  std::uint64_t cr = mod_u(c, q);
  for (std::uint64_t t = 1; t < q; ++t)
    if (tab.count(1, t, cr) > 0) out.push_back(t);
  return out;
}

LocalReport obstruction_report(std::uint64_t p, const mpz_class& ell,
                               const mpz_class& c,
                               const std::vector<std::uint32_t>& exceptionals) {
  if (!is_prime(ell) || ell == static_cast<unsigned long>(p) ||
      c % ell == 0 || ell % static_cast<unsigned long>(p) == 1)
    throw std::invalid_argument("ell outside hunt domain");
  if (!ell.fits_ulong_p())
    throw std::invalid_argument("ell outside hunt domain");
  std::set<std::uint64_t> qs{p, ell.get_ui()};
  for (const auto& [f, e] : factorize(c)) {
    (void)e;
    if (!f.fits_ulong_p())
      throw std::invalid_argument("coefficient factor too large");
    qs.insert(f.get_ui());
  }
  for (std::uint32_t e : exceptionals) qs.insert(e);

  LocalReport rep;
  rep.no_obstruction = true;
  DiagonalCurve cur{p, 1, ell, c};
  for (std::uint64_t q : qs) {
    rep.checked.push_back(q);
    QpResult r = solvable_qq(cur, q);
    if (!r.solvable && rep.no_obstruction) {
      rep.no_obstruction = false;
      rep.obstructed_at = q;
    }
    rep.checks.push_back(LocalCheck{q, std::move(r)});
  }
  return rep;
}

}  // namespace hasse
