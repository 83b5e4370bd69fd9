#include "hasse/lattice.hpp"

#include <cstdlib>
#include <stdexcept>

namespace hasse {

namespace {

mpf_class dot(const VecF& a, const VecF& b) {
  mpf_class s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

mpz_class round_to_int(const mpf_class& x) {
  mpf_class t = x + 0.5;
  mpf_floor(t.get_mpf_t(), t.get_mpf_t());
  mpz_class z;
  mpz_set_f(z.get_mpz_t(), t.get_mpf_t());
  return z;
}

struct GramSchmidt {
  MatF bstar;
  std::vector<std::vector<mpf_class>> mu;
  std::vector<mpf_class> bnorm;  // ||b*_i||^2

  void compute(const MatF& basis) {
    std::size_t n = basis.size(), m = basis[0].size();
    bstar.assign(n, VecF(m));
    mu.assign(n, std::vector<mpf_class>(n));
    bnorm.assign(n, mpf_class(0));
    for (std::size_t i = 0; i < n; ++i) {
      bstar[i] = basis[i];
      for (std::size_t j = 0; j < i; ++j) {
        mu[i][j] = dot(basis[i], bstar[j]) / bnorm[j];
        for (std::size_t t = 0; t < m; ++t)
          bstar[i][t] -= mu[i][j] * bstar[j][t];
      }
      bnorm[i] = dot(bstar[i], bstar[i]);
      if (bnorm[i] <= 0)
        throw std::invalid_argument("lattice: rank-deficient basis");
    }
  }
};

}  // namespace

void lll_reduce(MatF& basis, MatZ* transform) {
  const std::size_t n = basis.size();
  if (n == 0) return;
  const std::size_t m = basis[0].size();
  for (auto& r : basis)
    if (r.size() != m) throw std::invalid_argument("lll: ragged rows");
  MatZ u = MatZ::identity(n);

  GramSchmidt gs;
  gs.compute(basis);

  std::size_t k = 1;
  while (k < n) {
    for (std::size_t jj = k; jj-- > 0;) {
      mpz_class q = round_to_int(gs.mu[k][jj]);
      if (q == 0) continue;
      mpf_class qf(q);
      for (std::size_t t = 0; t < m; ++t) basis[k][t] -= qf * basis[jj][t];
      for (std::size_t t = 0; t < n; ++t) u.at(k, t) -= q * u.at(jj, t);
      for (std::size_t t = 0; t < jj; ++t)
        gs.mu[k][t] -= qf * gs.mu[jj][t];
      gs.mu[k][jj] -= qf;
    }
    mpf_class lhs = gs.bnorm[k];
    mpf_class rhs =
        (mpf_class(0.99) - gs.mu[k][k - 1] * gs.mu[k][k - 1]) *
        gs.bnorm[k - 1];
    if (lhs >= rhs) {
      ++k;
    } else {
      std::swap(basis[k], basis[k - 1]);
      for (std::size_t t = 0; t < n; ++t)
        std::swap(u.at(k, t), u.at(k - 1, t));
      gs.compute(basis);  // tiny dimensions, recompute wholesale
      k = k > 1 ? k - 1 : 1;
    }
  }
  if (transform) *transform = u;
}

bool enumerate_short_vectors(
    const MatF& basis, const mpf_class& radius2, std::uint64_t node_budget,
    const std::function<void(const std::vector<long>&)>& yield) {
  const std::size_t n = basis.size();
  if (n == 0) return true;
  GramSchmidt gs;
  gs.compute(basis);

  std::vector<long> x(n, 0);
  std::vector<mpf_class> center(n), used(n + 1);
  std::uint64_t nodes = 0;
  bool complete = true;

  // descend from the last coordinate; one representative of {v, -v}
  std::function<void(std::size_t, bool)> walk = [&](std::size_t lvl,
                                                    bool all_above_zero) {
    if (!complete) return;
    std::size_t i = lvl - 1;
    mpf_class c = 0;
    for (std::size_t j = lvl; j < n; ++j) c += gs.mu[j][i] * mpf_class(x[j]);
    mpf_class room = radius2 - used[lvl];
    if (room < 0) return;
    mpf_class half = sqrt(room / gs.bnorm[i]);
    long lo_raw, hi_raw;
    {
      mpz_class hi_z = round_to_int(half - c);
      mpz_class lo_z = round_to_int(-half - c) - 1;
      if (!hi_z.fits_slong_p() || !lo_z.fits_slong_p())
        throw std::runtime_error("enumeration bound overflow");
      hi_raw = hi_z.get_si();
      lo_raw = lo_z.get_si();
    }
    for (long v = lo_raw; v <= hi_raw; ++v) {
      if (all_above_zero && v < 0) continue;  // sign representative
      if (++nodes > node_budget) {
        complete = false;
        return;
      }
      mpf_class term = gs.bnorm[i] * (c + mpf_class(v)) * (c + mpf_class(v));
      if (used[lvl] + term > radius2) continue;
      x[i] = v;
      used[i] = used[lvl] + term;
      if (i == 0) {
        bool nonzero = false;
        for (long xi : x) nonzero |= (xi != 0);
        if (nonzero) yield(x);
      } else {
        walk(i, all_above_zero && v == 0);
      }
      if (!complete) return;
    }
    x[i] = 0;
  };
  used[n] = 0;
  walk(n, true);
  return complete;
}

}  // namespace hasse
