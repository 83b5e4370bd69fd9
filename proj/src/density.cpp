#include "hasse/density.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <stdexcept>

#include "hasse/arith.hpp"
#include "hasse/local.hpp"

namespace hasse {

DensityCertificate density_certificate(const PureFieldParams& field,
                                       const ClassGroupData& cls,
                                       const ExceptionalSet& exceptionals) {
  if (!field.wieferich_ok)
    throw std::runtime_error(
        "condition 1 fails: c^(p-1) = 1 (mod p^2)");
  if (!mpz_divisible_ui_p(cls.h.get_mpz_t(), field.p))
    throw std::runtime_error(
        "condition 2 fails: p does not divide the class number");
  if (exceptionals.p != field.p)
    throw std::invalid_argument("exceptional set is for a different p");

  std::set<std::uint64_t> qs;
  qs.insert(field.p);
  for (const auto& [prime, mult] : factorize(field.c)) {
    (void)mult;
    if (prime != field.p) qs.insert(prime.get_ui());
  }
  for (std::uint32_t q : exceptionals.primes) qs.insert(q);

  DensityCertificate cert;
  cert.p = field.p;
  cert.c = field.c;
  cert.N = cls.N;
  cert.threshold = mpq_class(1, pow_mpz(mpz_class(field.p), cls.N));

  // per-q class lists are independent; compute them in a parallel map and
  // assemble in ascending q order
  std::vector<std::uint64_t> order(qs.begin(), qs.end());
  std::vector<std::future<std::vector<std::uint64_t>>> jobs;
  for (std::uint64_t q : order)
    jobs.push_back(std::async(std::launch::async, [&, q] {
      return solvable_classes(field.p, field.c, q);
    }));

  cert.M = mpz_class(field.p) * mpz_class(field.p);
  cert.admissible = 1;
  mpz_class phi = mpz_class(field.p) * (field.p - 1);
  for (size_t i = 0; i < order.size(); ++i) {
    DensityFactor f;
    f.q = order[i];
    f.modulus = f.q == field.p ? cert.M : mpz_class(f.q);
    f.classes = jobs[i].get();
    f.count = f.classes.size();
    f.constrains = f.q == field.p || f.count < f.q - 1;
    if (f.constrains) {
      cert.admissible *= mpz_class(f.count);
      if (f.q != field.p) {
        cert.M *= f.q;
        phi *= f.q - 1;
      }
    }
    cert.factors.push_back(std::move(f));
  }
  cert.d = mpq_class(cert.admissible, phi);
  cert.d.canonicalize();
  cert.passes = cert.d > cert.threshold;
  return cert;
}

ChebotarevReport empirical_chebotarev(const PureFieldParams& field,
                                      std::uint64_t X) {
  if (X < 1000)
    throw std::invalid_argument("empirical_chebotarev: X below 10^3");
  if (X > 0xffffffffull)
    throw std::invalid_argument("empirical_chebotarev: X too large");
  ChebotarevReport rep;
  rep.X = X;
  rep.expected_split = mpq_class(1, mpz_class(field.p) * (field.p - 1));
  rep.expected_inert = mpq_class(1, field.p);
  for (std::uint32_t ell : primes_up_to(static_cast<std::uint32_t>(X))) {
    if (ell == field.p) continue;
    if (mpz_divisible_ui_p(field.c.get_mpz_t(), ell)) continue;
    auto shape = factor_shape(mpz_class(ell), field);
    ++rep.sample;
    if (shape.size() == field.p) {
      bool split = true;
      for (const auto& [deg, mult] : shape)
        if (deg != 1 || mult != 1) split = false;
      if (split) ++rep.split_count;
    } else if (shape.size() == 1 && shape[0].first == (int)field.p &&
               shape[0].second == 1) {
      ++rep.inert_count;
    }
  }
  if (rep.sample == 0) throw std::runtime_error("empty sample");
  rep.split_fraction = mpq_class(rep.split_count, rep.sample);
  rep.inert_fraction = mpq_class(rep.inert_count, rep.sample);
  rep.split_fraction.canonicalize();
  rep.inert_fraction.canonicalize();
  return rep;
}

}  // namespace hasse
