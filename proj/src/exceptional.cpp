#include "hasse/exceptional.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hasse/arith.hpp"
#include "hasse/local.hpp"

namespace hasse {

std::uint64_t weil_bound(std::uint64_t p) {
  if (p < 3 || !is_prime_u64(p))
    throw std::invalid_argument("weil_bound: p must be an odd prime");
  return (p - 1) * (p - 1) * (p - 2) * (p - 2);
}

std::optional<std::array<std::uint32_t, 2>> is_exceptional(std::uint32_t q,
                                                           std::uint64_t p) {
  if (p < 3 || !is_prime_u64(p))
    throw std::invalid_argument("is_exceptional: p must be an odd prime");
  if (!is_prime_u64(q) || q == p)
    throw std::invalid_argument("is_exceptional: q must be a prime != p");
  if (q % p != 1) return std::nullopt;
  PowerClassTable tab(q, p);
  std::uint64_t g = primitive_root(q);
  std::vector<std::uint64_t> gp(p);
  gp[0] = 1;
  for (std::uint64_t i = 1; i < p; ++i) gp[i] = mulmod(gp[i - 1], g, q);
  for (std::uint32_t i = 0; i < p; ++i)
    for (std::uint32_t j = 0; j < p; ++j)
      if (tab.count(1, gp[i], gp[j]) == 0)
        return std::array<std::uint32_t, 2>{i, j};
  return std::nullopt;
}

bool verify_exceptional_witness(std::uint32_t q, std::uint64_t p,
                                const std::array<std::uint32_t, 2>& w) {
  if (!is_prime_u64(q) || q % p != 1) return false;
  PowerClassTable tab(q, p);
  std::uint64_t g = primitive_root(q);
  return tab.count(1, powmod(g, w[0], q), powmod(g, w[1], q)) == 0;
}

ExceptionalSet exceptional_primes(std::uint64_t p, unsigned threads) {
  std::uint64_t bound = weil_bound(p);
  if (bound > 0xffffffffu)
    throw std::invalid_argument("exceptional_primes: scan bound too large");
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t q : primes_up_to(static_cast<std::uint32_t>(bound - 1)))
    if (q % p == 1) candidates.push_back(q);

  unsigned n = threads ? threads : std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  n = std::min<unsigned>(n, std::max<std::size_t>(candidates.size(), 1));

  std::vector<std::pair<std::uint32_t, std::array<std::uint32_t, 2>>> found;
  std::mutex found_mu;
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t k = cursor.fetch_add(1);
      if (k >= candidates.size()) return;
      if (auto w = is_exceptional(candidates[k], p)) {
        std::lock_guard<std::mutex> lk(found_mu);
        found.emplace_back(candidates[k], *w);
      }
    }
  };
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(found.begin(), found.end());

  ExceptionalSet out;
  out.p = p;
  out.bound = bound;
  for (auto& [q, w] : found) {
    out.primes.push_back(q);
    out.witnesses.emplace(q, w);
  }
  return out;
}

namespace {

bool load_and_check(const std::string& path, std::uint64_t p,
                    ExceptionalSet& out) {
  std::ifstream in(path);
  if (!in) return false;
  nlohmann::json j;
  try {
    in >> j;
    ExceptionalSet s;
    s.p = j.at("p").get<std::uint64_t>();
    s.bound = j.at("bound").get<std::uint64_t>();
    s.primes = j.at("primes").get<std::vector<std::uint32_t>>();
    for (auto& [k, v] : j.at("witnesses").items())
      s.witnesses.emplace(static_cast<std::uint32_t>(std::stoul(k)),
                          v.get<std::array<std::uint32_t, 2>>());
    if (s.p != p || s.bound != weil_bound(p)) return false;
    if (!std::is_sorted(s.primes.begin(), s.primes.end())) return false;
    if (s.witnesses.size() != s.primes.size()) return false;
    for (std::uint32_t q : s.primes) {
      if (!is_prime_u64(q) || q % p != 1 || q >= s.bound) return false;
      auto it = s.witnesses.find(q);
      if (it == s.witnesses.end()) return false;
      if (!verify_exceptional_witness(q, p, it->second)) return false;
    }
    out = std::move(s);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void store(const std::string& path, const ExceptionalSet& s) {
  nlohmann::json j;
  j["p"] = s.p;
  j["bound"] = s.bound;
  j["primes"] = s.primes;
  nlohmann::json w = nlohmann::json::object();
  for (auto& [q, ij] : s.witnesses) w[std::to_string(q)] = ij;
  j["witnesses"] = w;
  std::string tmp = path + ".tmp";
  {
    std::ofstream outf(tmp, std::ios::trunc);
    if (!outf) return;  // cache misses are tolerable, results are not
    outf << j.dump(1) << '\n';
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace

ExceptionalSet exceptional_primes_cached(std::uint64_t p,
                                         const std::string& cache_dir,
                                         bool refresh, unsigned threads) {
  std::string path =
      cache_dir + "/exceptional_p" + std::to_string(p) + ".json";
  if (!refresh) {
    ExceptionalSet cached;
    if (load_and_check(path, p, cached)) return cached;
  }
  ExceptionalSet fresh = exceptional_primes(p, threads);
  store(path, fresh);
  return fresh;
}

}  // namespace hasse
