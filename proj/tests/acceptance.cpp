// Acceptance gate: one line per criterion, pinned values and tolerances.
// Exits nonzero if any criterion fails.  Parts that need an external class
// group backend are skipped (never failed) unless HASSE_ORACLE_CMD is set.

#include <hasse/arith.hpp>
#include <hasse/classgroup.hpp>
#include <hasse/density.hpp>
#include <hasse/exceptional.hpp>
#include <hasse/field.hpp>
#include <hasse/hunter.hpp>
#include <hasse/local.hpp>

#include <json.hpp>
#include <oracles.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace hasse;
using json = nlohmann::json;

namespace {

struct Gate {
  int failed = 0;

  void run(int id, const char* title, double limit_s,
           const std::function<bool(std::string&)>& body) {
    std::string note;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = body(note);
    } catch (const std::exception& e) {
      ok = false;
      if (!note.empty()) note += "; ";
      note += std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (limit_s > 0 && secs > limit_s) {
      ok = false;
      if (!note.empty()) note += "; ";
      note += "over the time limit";
    }
    std::printf("criterion %d: %-52s %s  [%.1fs", id, title,
                ok ? "PASS" : "FAIL", secs);
    if (limit_s > 0) std::printf(" / limit %.0fs", limit_s);
    std::printf("]");
    if (!note.empty()) std::printf("  %s", note.c_str());
    std::printf("\n");
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

mpq_class q_of(const char* s) {
  mpq_class r(s);
  r.canonicalize();
  return r;
}

bool within_rel(const mpq_class& x, const mpq_class& want,
                const mpq_class& rel) {
  return x >= want * (1 - rel) && x <= want * (1 + rel);
}

std::string qstr(const mpq_class& x) { return x.get_str(); }

BackendConfig declared_be() { return BackendConfig{}; }

BackendConfig builtin_be() {
  BackendConfig b;
  b.kind = Backend::Builtin;
  return b;
}

std::optional<BackendConfig> env_oracle(const std::string& cache) {
  const char* cmd = std::getenv("HASSE_ORACLE_CMD");
  if (!cmd || !*cmd) return std::nullopt;
  BackendConfig b;
  b.kind = Backend::Oracle;
  b.oracle_cmd = cmd;
  b.oracle_cache = cache;
  return b;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* tag) {
    path = std::filesystem::temp_directory_path() /
           (std::string("acceptance_") + tag + "_" + std::to_string(getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

// ---- pinned published values ----

struct PinnedPair {
  std::uint64_t p;
  long c;
  const char* d;
  unsigned N;
};

const PinnedPair kPairs[] = {
    {3, 921, "1/6", 2},
    {5, 19, "9/25", 1},
    {7, 13, "500/2401", 1},
    {11, 373, "13608/161051", 2},
    {13, 103, "35640/371293", 1},
    {17, 1087, "745113600/6975757441", 1},
    {19, 37, "22762911600/322687697779", 1},
};

const std::vector<std::uint32_t> kExceptional[] = {
    /* 3 */ {},
    /* 5 */ {11},
    /* 7 */ {29, 43, 71},
    /* 11 */ {23, 67, 89, 199, 419},
    /* 13 */ {53, 79, 131, 157, 313, 547},
    /* 17 */ {103, 137, 239, 307, 409, 443, 613, 647, 919, 953, 1021, 1123,
              1429},
    /* 19 */ {191, 229, 419, 457, 571, 647, 761, 1103, 1597},
};

// #(solvable classes mod q^2 resp. q) at q = p and at each exceptional q,
// in that order, for the pairs that get a table in print.
struct PinnedCounts {
  std::size_t pair;  // index into kPairs
  std::vector<std::uint64_t> counts;
};

const PinnedCounts kCountTables[] = {
    {2, {25, 16, 30, 60}},
    {3, {54, 8, 66, 56, 162, 380}},
    {4, {99, 24, 78, 80, 108, 240, 546}},
    {5, {165, 102, 56, 168, 252, 360, 416, 612, 608, 918, 952, 1020, 1056,
         1428}},
    {6, {187, 100, 144, 374, 312, 450, 646, 720, 986, 1512}},
};

const DensityFactor* factor_at(const DensityCertificate& cert,
                               std::uint64_t q) {
  for (const auto& f : cert.factors)
    if (f.q == q) return &f;
  return nullptr;
}

}  // namespace

int main() {
  Gate g;

  // 1 — exceptional sets
  g.run(1, "exceptional sets exact for p = 3..19", 300, [&](std::string& note) {
    bool ok = true;
    for (std::size_t i = 0; i < 7; ++i) {
      auto set = exceptional_primes(kPairs[i].p);
      if (set.primes != kExceptional[i]) {
        ok = false;
        note += "p=" + std::to_string(kPairs[i].p) + " differs; ";
      }
    }
    if (ok) note = "7 sets, 37 primes total";
    return ok;
  });

  // 2 — solvable residue classes
  g.run(2, "solvable classes mod 9, 25, 11, 307", 0, [&](std::string& note) {
    bool ok = true;
    auto want_eq = [&](std::vector<std::uint64_t> got,
                       std::vector<std::uint64_t> want, const char* tag) {
      if (got != want) {
        ok = false;
        note += std::string(tag) + " differs; ";
      }
    };
    want_eq(solvable_classes(3, 921, 3), {2, 5, 8}, "mod 9");
    want_eq(solvable_classes(5, 19, 5), {7, 8, 9, 12, 13, 17, 18, 19, 24},
            "mod 25");
    want_eq(solvable_classes(5, 19, 11), {1, 2, 3, 4, 7, 8, 9, 10}, "mod 11");
    auto big = solvable_classes(3, 921, 307);
    if (big.size() != 102) {
      ok = false;
      note += "mod 307 count " + std::to_string(big.size()) + " != 102; ";
    }
    if (ok) note = "3 + 9 + 8 + 102 classes";
    return ok;
  });

  // 3 — N_q tables
  g.run(3, "N_q tables for the five printed pairs", 0, [&](std::string& note) {
    bool ok = true;
    for (const auto& tab : kCountTables) {
      const PinnedPair& pp = kPairs[tab.pair];
      auto F = field_data(pp.p, pp.c);
      auto cls = class_data(F, declared_be());
      auto exc = exceptional_primes(pp.p);
      auto cert = density_certificate(F, cls, exc);
      std::vector<std::uint64_t> cols{pp.p};
      for (auto q : exc.primes) cols.push_back(q);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const DensityFactor* f = factor_at(cert, cols[i]);
        if (!f || f->count != tab.counts[i]) {
          ok = false;
          note += "(" + std::to_string(pp.p) + "," + std::to_string(pp.c) +
                  ") at q=" + std::to_string(cols[i]) + " differs; ";
        }
      }
    }
    if (ok) note = "41 table entries";
    return ok;
  });

  // 4 — densities
  g.run(4, "d exact for all seven pairs, d > 1/p^N", 60,
        [&](std::string& note) {
          bool ok = true;
          for (const auto& pp : kPairs) {
            auto F = field_data(pp.p, pp.c);
            auto cls = class_data(F, declared_be());
            auto cert = density_certificate(F, cls, exceptional_primes(pp.p));
            mpq_class want = q_of(pp.d);
            mpq_class thr(1);
            thr /= mpq_class(pow_mpz(mpz_class(pp.p), pp.N));
            if (cert.d != want || cert.N != pp.N || cert.threshold != thr ||
                !cert.passes) {
              ok = false;
              note += "(" + std::to_string(pp.p) + "," + std::to_string(pp.c) +
                      ") d=" + qstr(cert.d) + " want " + pp.d + "; ";
            }
          }
          if (ok) note = "7 densities, each above its 1/p^N bar";
          return ok;
        });

  // 5 — the classical Selmer curve has no local obstruction
  g.run(5, "3x^3 + 4y^3 + 5z^3 solvable over Q_2, Q_3, Q_5", 0,
        [&](std::string& note) {
          DiagonalCurve sel{3, 3, 4, 5};
          bool ok = true;
          for (std::uint64_t q : {2, 3, 5}) {
            auto r = solvable_qq(sel, q);
            if (!r.solvable || !r.witness ||
                !verify_hensel_witness(sel, q, *r.witness)) {
              ok = false;
              note += "q=" + std::to_string(q) + " fails; ";
            }
          }
          if (ok) note = "witnessed at all three places";
          return ok;
        });

  // 6 — the published progression hunt
  g.run(6, "hunt 7 (mod 275) for (5, 19) below 10^5", 1800,
        [&](std::string& note) {
          TempDir dir("hunt275");
          HuntOptions opt;
          opt.lo = 2;
          opt.hi = 99999;
          opt.class_filter = {{mpz_class(7), mpz_class(275)}};
          opt.out_path = dir.file("out.jsonl");
          opt.candidates_path = dir.file("cand.jsonl");
          auto st = hunt(5, 19, declared_be(), opt);
          bool ok = st.candidates_in_s == 48;
          note = "candidates=" + std::to_string(st.candidates_in_s) +
                 " (want 48)";
          for (const auto& line : lines_of(opt.candidates_path)) {
            auto cert = certificate_from_json(line);
            if (cert.ell % 275 != 7 || !verify_certificate(cert).ok) {
              ok = false;
              note += "; bad candidate record";
              break;
            }
          }
          if (auto be = env_oracle(dir.file("cache"))) {
            HuntOptions opt2 = opt;
            opt2.out_path = dir.file("out2.jsonl");
            opt2.candidates_path = dir.file("cand2.jsonl");
            auto st2 = hunt(5, 19, *be, opt2);
            bool okc = st2.candidates_in_s == 48 && st2.confirmed_s0 == 31 &&
                       st2.min_confirmed && *st2.min_confirmed == 1657 &&
                       st2.max_confirmed && *st2.max_confirmed == 95707;
            note += "; confirmed=" + std::to_string(st2.confirmed_s0) +
                    " (want 31), min=" +
                    (st2.min_confirmed ? st2.min_confirmed->get_str()
                                       : std::string("-")) +
                    " (want 1657), max=" +
                    (st2.max_confirmed ? st2.max_confirmed->get_str()
                                       : std::string("-")) +
                    " (want 95707)";
            ok = ok && okc;
          } else {
            note += "; confirmation half SKIPPED (set HASSE_ORACLE_CMD)";
          }
          return ok;
        });

  // 7 — the built-in cubic backend
  g.run(7, "builtin class group of Q(921^(1/3)) is Z/3 x Z/3", 120,
        [&](std::string& note) {
          auto cls = class_data(field_data(3, 921), builtin_be());
          bool ok = cls.invariants == std::vector<mpz_class>{3, 3} &&
                    cls.h == 9 && cls.e == 3 && cls.r == 1 && cls.N == 2;
          note = "invariants [";
          for (std::size_t i = 0; i < cls.invariants.size(); ++i)
            note += (i ? ", " : "") + cls.invariants[i].get_str();
          note += "]";
          return ok;
        });

  // 8 — property suites
  g.run(8, "property suites a-e", 0, [&](std::string& note) {
    bool ok = true;

    // a. Q_q solvability against the independent digit search
    {
      std::mt19937 rng(99991);
      std::uniform_int_distribution<long> coef(-20, 20);
      auto draw = [&] {
        long v = 0;
        while (v == 0) v = coef(rng);
        return v;
      };
      std::uint64_t agree = 0, total = 0;
      for (int t = 0; t < 500; ++t) {
        long a = draw(), b = draw(), c = draw();
        for (std::uint64_t p : {3, 5})
          for (std::uint64_t q : {2, 3, 5, 7}) {
            DiagonalCurve cur{p, a, b, c};
            bool lib = solvable_qq(cur, q).solvable;
            bool ref = testoracle::naive_solvable_qq(p, q, a, b, c);
            ++total;
            if (lib == ref) ++agree;
          }
      }
      if (agree != total) {
        ok = false;
        note += "a: " + std::to_string(agree) + "/" + std::to_string(total) +
                " agree; ";
      } else {
        note += "a: 4000/4000; ";
      }
    }

    // b. N_q = q + 1 whenever q != 1 (mod p)
    {
      std::uint64_t checked = 0, good = 0;
      for (std::uint64_t p : {3, 5, 7})
        for (std::uint64_t q : primes_up_to(199)) {
          if (q % p == 1 || q == 2 || q == 3 || q == p) continue;
          DiagonalCurve cur{p, 1, 2, 3};
          ++checked;
          if (count_points_fq(cur, static_cast<std::uint32_t>(q)) == q + 1)
            ++good;
        }
      if (good != checked) {
        ok = false;
        note += "b: " + std::to_string(good) + "/" + std::to_string(checked) +
                "; ";
      } else {
        note += "b: " + std::to_string(checked) + " counts; ";
      }
    }

    // c. Weil bound on 1000 random smooth counts
    {
      std::mt19937 rng(424243);
      auto qs = primes_up_to(300);
      std::uniform_int_distribution<std::size_t> pick(0, qs.size() - 1);
      std::uint64_t good = 0;
      for (int t = 0; t < 1000; ++t) {
        std::uint64_t p = (t % 3 == 0) ? 3 : (t % 3 == 1) ? 5 : 7;
        std::uint64_t q = qs[pick(rng)];
        std::uniform_int_distribution<long> coef(1, static_cast<long>(q - 1));
        DiagonalCurve cur{p, coef(rng), coef(rng), coef(rng)};
        long long n =
            static_cast<long long>(count_points_fq(cur, (std::uint32_t)q));
        long long diff = n - static_cast<long long>(q + 1);
        long long genus2 = static_cast<long long>((p - 1) * (p - 2));
        if (static_cast<long long>(diff) * diff <=
            genus2 * genus2 * static_cast<long long>(q))
          ++good;
      }
      if (good != 1000) {
        ok = false;
        note += "c: " + std::to_string(good) + "/1000; ";
      } else {
        note += "c: 1000/1000 within Weil; ";
      }
    }

    // d. splitting degrees sum to p
    {
      std::uint64_t checked = 0, good = 0;
      for (const auto& [p, c] : std::vector<std::pair<std::uint64_t, long>>{
               {3, 921}, {5, 19}, {7, 13}}) {
        auto F = field_data(p, c);
        for (std::uint64_t ell : primes_up_to(999)) {
          auto shape = factor_shape(mpz_class((unsigned long)ell), F);
          int sum = 0;
          for (auto [f, e] : shape) sum += e * f;
          ++checked;
          if (sum == static_cast<int>(p)) ++good;
        }
      }
      if (good != checked) {
        ok = false;
        note += "d: " + std::to_string(good) + "/" + std::to_string(checked) +
                "; ";
      } else {
        note += "d: " + std::to_string(checked) + " shapes; ";
      }
    }

    // e. certificate round-trip and tamper detection
    {
      TempDir dir("certs");
      HuntOptions opt;
      opt.lo = 2;
      opt.hi = 600;
      opt.out_path = dir.file("out.jsonl");
      hunt(3, 921, builtin_be(), opt);
      auto lines = lines_of(opt.out_path);
      bool rt = lines.size() == 11;
      for (const auto& line : lines)
        if (certificate_json(certificate_from_json(line)) != line) rt = false;

      auto detected = [&](const std::function<void(json&)>& mutate) {
        auto j = json::parse(lines.front());
        mutate(j);
        try {
          return !verify_certificate(certificate_from_json(j.dump())).ok;
        } catch (const std::exception&) {
          return true;
        }
      };
      int caught = 0;
      const int kTampers = 12;
      caught += detected([](json& j) { j["root"] = "7"; });
      caught += detected([](json& j) { j["ell"] = "4"; });
      caught += detected([](json& j) { j["ell"] = "7"; });
      caught += detected(
          [](json& j) { j["conditions"]["wieferich_ok"] = false; });
      caught += detected([](json& j) { j["class_data"]["h"] = "12"; });
      caught += detected(
          [](json& j) { j["class_data"]["invariants"] = {"3"}; });
      caught += detected([](json& j) { j["s0"]["in_s0"] = false; });
      caught += detected([](json& j) { j["s0"]["class_order"] = "1"; });
      caught += detected([](json& j) {
        auto& w = j["local"]["checks"][0]["witness"];
        w["s"] = w["s"].get<int>() + 1;
      });
      caught += detected([](json& j) { j["local"]["checks"].erase(0); });
      caught += detected(
          [](json& j) { j["dedekind"]["transcript"] = "fine."; });
      caught += detected([](json& j) { j["level"] = "bogus"; });
      if (!rt || caught != kTampers) {
        ok = false;
        note += "e: roundtrip " + std::string(rt ? "ok" : "BROKEN") +
                ", tampers " + std::to_string(caught) + "/" +
                std::to_string(kTampers) + "; ";
      } else {
        note += "e: 11 round-trips, 12/12 tampers caught";
      }
    }
    return ok;
  });

  // 9 — empirical densities
  g.run(9, "Chebotarev and principal-class densities", 0,
        [&](std::string& note) {
          bool ok = true;
          auto F = field_data(5, 19);
          auto rep = empirical_chebotarev(F, 1000000);
          bool split_ok =
              within_rel(rep.split_fraction, q_of("1/20"), q_of("15/100"));
          bool inert_ok =
              within_rel(rep.inert_fraction, q_of("1/5"), q_of("5/100"));
          note = "split=" + qstr(rep.split_fraction) + " (1/20 +/- 15%) " +
                 (split_ok ? "ok" : "OUT") + ", inert=" +
                 qstr(rep.inert_fraction) + " (1/5 +/- 5%) " +
                 (inert_ok ? "ok" : "OUT");
          ok = split_ok && inert_ok;

          auto cls3 = class_data(field_data(3, 921), builtin_be());
          auto est3 = empirical_principal_density(cls3, 10000, builtin_be());
          bool d3_ok = within_rel(est3.estimate, q_of("1/9"), q_of("30/100"));
          note += "; builtin (3,921) density=" + qstr(est3.estimate) +
                  " (1/9 +/- 30%) " + (d3_ok ? "ok" : "OUT");
          ok = ok && d3_ok;

          TempDir dir("dens");
          if (auto be = env_oracle(dir.file("cache"))) {
            auto cls5 = class_data(F, *be);
            auto est5 = empirical_principal_density(cls5, 10000, *be);
            bool d5_ok =
                within_rel(est5.estimate, q_of("1/5"), q_of("30/100"));
            note += "; (5,19) density=" + qstr(est5.estimate) +
                    " (1/5 +/- 30%) " + (d5_ok ? "ok" : "OUT");
            ok = ok && d5_ok;
          } else {
            note += "; (5,19) density SKIPPED (set HASSE_ORACLE_CMD)";
          }
          return ok;
        });

  std::printf("acceptance: %d criteria, %d failed\n", 9, g.failed);
  return g.failed == 0 ? 0 : 1;
}
