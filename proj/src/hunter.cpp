#include "hasse/hunter.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hasse/arith.hpp"

namespace hasse {

using nlohmann::json;

namespace {

// ---- JSON atoms ----
// Integers ride as decimal strings once they leave the exact-double range;
// rationals always as strings ("3/4", "5").

json jz(const mpz_class& v) {
  if (v.fits_slong_p()) {
    long s = v.get_si();
    if (s > -(1L << 53) && s < (1L << 53)) return json(s);
  }
  return json(v.get_str());
}

mpz_class jz_parse(const json& v, const char* where) {
  if (v.is_number_integer()) return mpz_class(static_cast<long>(v.get<std::int64_t>()));
  if (v.is_number_unsigned()) {
    std::ostringstream os;
    os << v.get<std::uint64_t>();
    return mpz_class(os.str());
  }
  if (v.is_string()) {
    mpz_class r;
    if (r.set_str(v.get<std::string>(), 10) != 0)
      throw std::runtime_error(std::string("malformed certificate: bad integer in ") + where);
    return r;
  }
  throw std::runtime_error(std::string("malformed certificate: expected integer in ") + where);
}

json jq(const mpq_class& v) { return json(v.get_str()); }

mpq_class jq_parse(const json& v, const char* where) {
  if (v.is_string()) {
    mpq_class r;
    if (r.set_str(v.get<std::string>(), 10) != 0)
      throw std::runtime_error(std::string("malformed certificate: bad rational in ") + where);
    r.canonicalize();
    return r;
  }
  return mpq_class(jz_parse(v, where));
}

const char* method_tag(LocalMethod m) {
  switch (m) {
    case LocalMethod::BijectiveRoot: return "bijective_root";
    case LocalMethod::WeilBound: return "weil_bound";
    case LocalMethod::FqCount: return "fq_count";
    case LocalMethod::Bfs: return "bfs";
  }
  return "?";
}

LocalMethod method_from(const std::string& s) {
  if (s == "bijective_root") return LocalMethod::BijectiveRoot;
  if (s == "weil_bound") return LocalMethod::WeilBound;
  if (s == "fq_count") return LocalMethod::FqCount;
  if (s == "bfs") return LocalMethod::Bfs;
  throw std::runtime_error("malformed certificate: unknown local method " + s);
}

json local_to_json(const LocalReport& rep) {
  json checks = json::array();
  for (const auto& ch : rep.checks) {
    json c{{"q", ch.q},
           {"solvable", ch.result.solvable},
           {"method", method_tag(ch.result.method)},
           {"exhausted_level", ch.result.exhausted_level}};
    if (ch.result.witness) {
      const HenselWitness& w = *ch.result.witness;
      c["witness"] = json{{"x", jz(w.x)}, {"y", jz(w.y)}, {"z", jz(w.z)},
                          {"level", w.level}, {"coord", w.coord}, {"s", w.s}};
    } else {
      c["witness"] = nullptr;
    }
    checks.push_back(std::move(c));
  }
  json out{{"no_obstruction", rep.no_obstruction},
           {"checked", rep.checked},
           {"checks", std::move(checks)}};
  if (rep.obstructed_at) out["obstructed_at"] = *rep.obstructed_at;
  else out["obstructed_at"] = nullptr;
  return out;
}

LocalReport local_from_json(const json& j) {
  LocalReport rep;
  rep.no_obstruction = j.at("no_obstruction").get<bool>();
  for (const auto& q : j.at("checked"))
    rep.checked.push_back(q.get<std::uint64_t>());
  if (!j.at("obstructed_at").is_null())
    rep.obstructed_at = j.at("obstructed_at").get<std::uint64_t>();
  for (const auto& c : j.at("checks")) {
    LocalCheck ch;
    ch.q = c.at("q").get<std::uint64_t>();
    ch.result.solvable = c.at("solvable").get<bool>();
    ch.result.method = method_from(c.at("method").get<std::string>());
    ch.result.exhausted_level = c.at("exhausted_level").get<int>();
    if (!c.at("witness").is_null()) {
      const json& w = c.at("witness");
      HenselWitness hw;
      hw.x = jz_parse(w.at("x"), "witness.x");
      hw.y = jz_parse(w.at("y"), "witness.y");
      hw.z = jz_parse(w.at("z"), "witness.z");
      hw.level = w.at("level").get<int>();
      hw.coord = w.at("coord").get<int>();
      hw.s = w.at("s").get<int>();
      ch.result.witness = hw;
    }
    rep.checks.push_back(std::move(ch));
  }
  return rep;
}

json class_data_to_json(const ClassGroupData& cls) {
  json inv = json::array();
  for (const auto& d : cls.invariants) inv.push_back(jz(d));
  return json{{"invariants", std::move(inv)}, {"h", jz(cls.h)},
              {"e", jz(cls.e)},               {"r", cls.r},
              {"N", cls.N},                   {"source", cls.source}};
}

ClassGroupData class_data_from_json(const json& j,
                                    const PureFieldParams& field) {
  ClassGroupData cls;
  cls.field = field;
  for (const auto& d : j.at("invariants"))
    cls.invariants.push_back(jz_parse(d, "invariants"));
  cls.h = jz_parse(j.at("h"), "h");
  cls.e = jz_parse(j.at("e"), "e");
  cls.r = j.at("r").get<unsigned>();
  cls.N = j.at("N").get<unsigned>();
  cls.source = j.at("source").get<std::string>();
  return cls;
}

const char* principality_tag(Principality s) {
  switch (s) {
    case Principality::Principal: return "principal";
    case Principality::NotPrincipal: return "not_principal";
    case Principality::Unknown: return "unknown";
  }
  return "?";
}

json verdict_to_json(const PrincipalityVerdict& v) {
  json out{{"status", principality_tag(v.status)}};
  if (v.generator) {
    json g = json::array();
    for (const auto& x : *v.generator) g.push_back(jq(x));
    out["generator"] = std::move(g);
  } else {
    out["generator"] = nullptr;
  }
  out["class_order"] = v.class_order ? jz(*v.class_order) : json(nullptr);
  out["search_bound"] = v.search_bound ? jz(*v.search_bound) : json(nullptr);
  return out;
}

PrincipalityVerdict verdict_from_json(const json& j) {
  PrincipalityVerdict v;
  std::string s = j.at("status").get<std::string>();
  if (s == "principal") v.status = Principality::Principal;
  else if (s == "not_principal") v.status = Principality::NotPrincipal;
  else if (s == "unknown") v.status = Principality::Unknown;
  else throw std::runtime_error("malformed certificate: bad principality status");
  if (!j.at("generator").is_null()) {
    std::vector<mpq_class> g;
    for (const auto& x : j.at("generator")) g.push_back(jq_parse(x, "generator"));
    v.generator = std::move(g);
  }
  if (!j.at("class_order").is_null())
    v.class_order = jz_parse(j.at("class_order"), "class_order");
  if (!j.at("search_bound").is_null())
    v.search_bound = jz_parse(j.at("search_bound"), "search_bound");
  return v;
}

json s0_to_json(const S0Evidence& ev) {
  json out;
  switch (ev.result) {
    case Tri::True: out["in_s0"] = true; break;
    case Tri::False: out["in_s0"] = false; break;
    case Tri::Unknown: out["in_s0"] = nullptr; break;
  }
  out["ell"] = jz(ev.ell);
  out["root"] = jz(ev.root);
  out["tested_power"] = jz(ev.tested_power);
  out["class_order"] = ev.class_order ? jz(*ev.class_order) : json(nullptr);
  out["verdict"] = ev.verdict ? verdict_to_json(*ev.verdict) : json(nullptr);
  return out;
}

S0Evidence s0_from_json(const json& j) {
  S0Evidence ev;
  const json& r = j.at("in_s0");
  if (r.is_null()) ev.result = Tri::Unknown;
  else ev.result = r.get<bool>() ? Tri::True : Tri::False;
  ev.ell = jz_parse(j.at("ell"), "s0.ell");
  ev.root = jz_parse(j.at("root"), "s0.root");
  ev.tested_power = jz_parse(j.at("tested_power"), "s0.tested_power");
  if (!j.at("class_order").is_null())
    ev.class_order = jz_parse(j.at("class_order"), "s0.class_order");
  if (!j.at("verdict").is_null()) ev.verdict = verdict_from_json(j.at("verdict"));
  return ev;
}

json certificate_to_json_obj(const CounterexampleCertificate& cert) {
  return json{
      {"v", 1},
      {"p", cert.p},
      {"c", jz(cert.c)},
      {"ell", jz(cert.ell)},
      {"level", cert.level == VerificationLevel::Full ? "full" : "local_only"},
      {"root", jz(cert.root)},
      {"dedekind", json{{"ell", jz(cert.not_index_divisor.ell)},
                        {"divides_index", cert.not_index_divisor.divides_index},
                        {"transcript", cert.not_index_divisor.transcript}}},
      {"local", local_to_json(cert.local)},
      {"class_data", class_data_to_json(cert.cls)},
      {"s0", s0_to_json(cert.s0)},
      {"conditions", json{{"wieferich_ok", cert.wieferich_ok},
                          {"p_divides_h", cert.p_divides_h}}},
  };
}

void atomic_write(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp" + std::to_string(getpid());
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << text;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw std::runtime_error("cannot write " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename " + tmp);
  }
}

// Drop record lines past the checkpoint cursor (a crash between appending
// and checkpointing leaves at most one interval of extras).
void trim_jsonl(const std::string& path, const mpz_class& cursor) {
  std::ifstream in(path);
  if (!in) return;
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (jz_parse(j.at("ell"), "ell") > cursor) continue;
    } catch (const std::exception&) {
      continue;  // torn tail line from a crash
    }
    kept += line;
    kept += '\n';
  }
  in.close();
  atomic_write(path, kept);
}

json state_to_json(const HuntState& st) {
  json out{{"v", 1},
           {"p", st.p},
           {"c", jz(st.c)},
           {"lo", jz(st.lo)},
           {"hi", jz(st.hi)},
           {"backend", st.backend},
           {"cursor", jz(st.cursor)},
           {"candidates_in_s", st.candidates_in_s},
           {"confirmed_s0", st.confirmed_s0},
           {"unknown", st.unknown}};
  if (st.class_filter)
    out["class_filter"] = json{jz(st.class_filter->first), jz(st.class_filter->second)};
  else
    out["class_filter"] = nullptr;
  out["min_confirmed"] = st.min_confirmed ? jz(*st.min_confirmed) : json(nullptr);
  out["max_confirmed"] = st.max_confirmed ? jz(*st.max_confirmed) : json(nullptr);
  return out;
}

}  // namespace

std::string certificate_json(const CounterexampleCertificate& cert) {
  return certificate_to_json_obj(cert).dump();
}

CounterexampleCertificate certificate_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed certificate: not JSON (" +
                             std::string(e.what()) + ")");
  }
  try {
    if (!j.is_object()) throw std::runtime_error("not an object");
    if (j.at("v").get<int>() != 1)
      throw std::runtime_error("unsupported schema version");
    CounterexampleCertificate cert;
    cert.p = j.at("p").get<std::uint64_t>();
    cert.c = jz_parse(j.at("c"), "c");
    cert.ell = jz_parse(j.at("ell"), "ell");
    std::string lvl = j.at("level").get<std::string>();
    if (lvl == "full") cert.level = VerificationLevel::Full;
    else if (lvl == "local_only") cert.level = VerificationLevel::LocalOnly;
    else throw std::runtime_error("bad level");
    cert.root = jz_parse(j.at("root"), "root");
    const json& dk = j.at("dedekind");
    cert.not_index_divisor.ell = jz_parse(dk.at("ell"), "dedekind.ell");
    cert.not_index_divisor.divides_index = dk.at("divides_index").get<bool>();
    cert.not_index_divisor.transcript = dk.at("transcript").get<std::string>();
    cert.local = local_from_json(j.at("local"));
    // field params are re-derived, never trusted from the wire
    PureFieldParams F = field_data(cert.p, cert.c);
    cert.cls = class_data_from_json(j.at("class_data"), F);
    cert.s0 = s0_from_json(j.at("s0"));
    cert.wieferich_ok = j.at("conditions").at("wieferich_ok").get<bool>();
    cert.p_divides_h = j.at("conditions").at("p_divides_h").get<bool>();
    return cert;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed certificate: " + std::string(e.what()));
  }
}

std::string density_json(const DensityCertificate& cert) {
  json factors = json::array();
  for (const auto& f : cert.factors) {
    factors.push_back(json{{"q", f.q},
                           {"modulus", jz(f.modulus)},
                           {"count", f.count},
                           {"constrains", f.constrains},
                           {"classes", f.classes}});
  }
  return json{{"v", 1},
              {"p", cert.p},
              {"c", jz(cert.c)},
              {"M", jz(cert.M)},
              {"admissible_count", jz(cert.admissible)},
              {"d", jq(cert.d)},
              {"N", cert.N},
              {"threshold", jq(cert.threshold)},
              {"passes", cert.passes},
              {"per_q", std::move(factors)}}
      .dump();
}

std::string exceptional_json(const ExceptionalSet& set) {
  json witnesses = json::object();
  for (const auto& [q, w] : set.witnesses)
    witnesses[std::to_string(q)] = json{w[0], w[1]};
  return json{{"v", 1},
              {"p", set.p},
              {"bound", set.bound},
              {"primes", set.primes},
              {"witnesses", std::move(witnesses)}}
      .dump();
}

std::string local_report_json(const LocalReport& rep) {
  json j = local_to_json(rep);
  j["v"] = 1;
  return j.dump();
}

std::string chebotarev_json(const ChebotarevReport& rep) {
  return json{{"v", 1},
              {"X", rep.X},
              {"sample", rep.sample},
              {"split_count", rep.split_count},
              {"inert_count", rep.inert_count},
              {"split_fraction", jq(rep.split_fraction)},
              {"inert_fraction", jq(rep.inert_fraction)},
              {"expected_split", jq(rep.expected_split)},
              {"expected_inert", jq(rep.expected_inert)}}
      .dump();
}

std::string hunt_state_json(const HuntState& st) {
  return state_to_json(st).dump();
}

std::string analysis_json(const AnalysisReport& rep) {
  json j{{"v", 1},
         {"p", rep.field.p},
         {"c", jz(rep.field.c)},
         {"poly_disc", jz(rep.field.poly_disc)},
         {"wieferich_ok", rep.wieferich_ok},
         {"p_divides_h", rep.p_divides_h},
         {"density_passes", rep.density_passes},
         {"verdict", rep.s0_infinite ? "S0 infinite by the theorem"
                                     : "not established"},
         {"failed", rep.failed},
         {"exceptional", json::parse(exceptional_json(rep.exceptionals))},
         // S here follows the proofs' convention: ell = p and ell | c are
         // excluded even though the set's loosest description omits this
         {"s_convention",
          "ell runs over primes with ell != 1 (mod p), ell != p, ell !| c, "
          "ell coprime to the index"}};
  j["class_data"] = rep.cls ? class_data_to_json(*rep.cls) : json(nullptr);
  j["density"] = rep.density ? json::parse(density_json(*rep.density))
                             : json(nullptr);
  return j.dump();
}

AnalysisReport analyze(std::uint64_t p, const mpz_class& c,
                       const BackendConfig& backend,
                       const std::string& cache_dir) {
  AnalysisReport rep;
  rep.field = field_data(p, c);
  rep.wieferich_ok = rep.field.wieferich_ok;
  if (!rep.wieferich_ok)
    rep.failed.push_back("condition 1: c^(p-1) = 1 (mod p^2)");
  rep.exceptionals = cache_dir.empty()
                         ? exceptional_primes(p)
                         : exceptional_primes_cached(p, cache_dir);
  rep.cls = class_data(rep.field, backend);
  rep.p_divides_h = mpz_divisible_ui_p(rep.cls->h.get_mpz_t(), p) != 0;
  if (!rep.p_divides_h)
    rep.failed.push_back("condition 2: p does not divide h_K");
  if (rep.wieferich_ok && rep.p_divides_h) {
    rep.density = density_certificate(rep.field, *rep.cls, rep.exceptionals);
    rep.density_passes = rep.density->passes;
    if (!rep.density_passes)
      rep.failed.push_back("density: d <= 1/p^N");
  }
  rep.s0_infinite = rep.wieferich_ok && rep.p_divides_h && rep.density_passes;
  return rep;
}

namespace {

struct HuntRecord {
  CounterexampleCertificate cert;
  Tri result;
};

}  // namespace

HuntState hunt(std::uint64_t p, const mpz_class& c,
               const BackendConfig& backend, const HuntOptions& opt,
               const std::function<void(const CounterexampleCertificate&)>&
                   emit) {
  if (opt.hi < 2 || opt.hi < opt.lo)
    throw std::invalid_argument("hunt: empty range");
  if (!opt.hi.fits_ulong_p())
    throw std::invalid_argument("hunt: range end exceeds the sieve width");
  if (opt.class_filter) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), opt.class_filter->first.get_mpz_t(),
            opt.class_filter->second.get_mpz_t());
    if (g != 1)
      throw std::invalid_argument("hunt: class filter has gcd(a, M) > 1");
  }

  AnalysisReport rep = analyze(p, c, backend, opt.cache_dir);
  if (!rep.s0_infinite && !opt.force) {
    std::string why = "analysis verdict negative";
    for (const auto& f : rep.failed) why += "; " + f;
    throw std::runtime_error(why + " (hunting anyway needs force)");
  }
  const ClassGroupData cls = *rep.cls;
  const PureFieldParams& F = rep.field;
  const std::vector<std::uint32_t>& exc = rep.exceptionals.primes;
  const bool can_test = cls.r > 0;

  HuntState st;
  st.p = p;
  st.c = c;
  st.lo = opt.lo < 2 ? mpz_class(2) : opt.lo;
  st.hi = opt.hi;
  st.class_filter = opt.class_filter;
  st.backend = backend_tag(backend.kind);
  st.cursor = st.lo - 1;

  // resume from a matching checkpoint; reject one from different params
  if (!opt.checkpoint_path.empty()) {
    std::ifstream in(opt.checkpoint_path);
    if (in) {
      json ck;
      try {
        ck = json::parse(in);
      } catch (const json::exception& e) {
        throw std::runtime_error("unreadable checkpoint: " +
                                 std::string(e.what()));
      }
      json want = state_to_json(st);
      for (const char* k : {"p", "c", "lo", "hi", "backend", "class_filter"}) {
        if (ck.at(k) != want.at(k))
          throw std::runtime_error(
              "checkpoint was written by a different hunt (field: " +
              std::string(k) + ")");
      }
      st.cursor = jz_parse(ck.at("cursor"), "cursor");
      st.candidates_in_s = ck.at("candidates_in_s").get<std::uint64_t>();
      st.confirmed_s0 = ck.at("confirmed_s0").get<std::uint64_t>();
      st.unknown = ck.at("unknown").get<std::uint64_t>();
      if (!ck.at("min_confirmed").is_null())
        st.min_confirmed = jz_parse(ck.at("min_confirmed"), "min_confirmed");
      if (!ck.at("max_confirmed").is_null())
        st.max_confirmed = jz_parse(ck.at("max_confirmed"), "max_confirmed");
      if (!opt.out_path.empty()) trim_jsonl(opt.out_path, st.cursor);
      if (!opt.candidates_path.empty())
        trim_jsonl(opt.candidates_path, st.cursor);
    }
  }

  const bool fresh = st.cursor < st.lo;
  std::FILE* fout = nullptr;
  std::FILE* fcand = nullptr;
  if (!opt.out_path.empty()) {
    fout = std::fopen(opt.out_path.c_str(), fresh ? "w" : "a");
    if (!fout) throw std::runtime_error("cannot open " + opt.out_path);
  }
  if (!opt.candidates_path.empty()) {
    fcand = std::fopen(opt.candidates_path.c_str(), fresh ? "w" : "a");
    if (!fcand) {
      if (fout) std::fclose(fout);
      throw std::runtime_error("cannot open " + opt.candidates_path);
    }
  }

  // disjoint intervals, processed by a pool, committed in ascending order
  std::uint64_t start = mpz_class(st.cursor + 1).get_ui();
  std::uint64_t hi = st.hi.get_ui();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> intervals;
  if (start < 2) start = 2;
  if (start <= hi) {
    std::uint64_t span = hi - start + 1;
    unsigned jobs = opt.jobs ? opt.jobs : 1;
    std::uint64_t chunk =
        std::max<std::uint64_t>(512, std::min<std::uint64_t>(
                                         1u << 18, span / (8 * jobs) + 1));
    for (std::uint64_t a = start; a <= hi;) {
      std::uint64_t b = std::min(hi, a + chunk - 1);
      intervals.emplace_back(a, b);
      a = b + 1;
    }
  }

  std::mutex mu;
  std::condition_variable cv;
  std::map<std::size_t, std::vector<HuntRecord>> done;
  std::atomic<std::size_t> next_interval{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;

  auto process_ell = [&](std::uint64_t ell,
                         std::vector<HuntRecord>& out) {
    if (ell == p || ell % p == 1) return;
    mpz_class zell(ell);
    if (mpz_divisible_p(c.get_mpz_t(), zell.get_mpz_t())) return;
    DedekindCheck dk = dedekind_at(zell, F);
    if (dk.divides_index) return;
    LocalReport lr = obstruction_report(p, zell, c, exc);
    if (!lr.no_obstruction) return;

    HuntRecord rec;
    rec.cert.p = p;
    rec.cert.c = c;
    rec.cert.ell = zell;
    rec.cert.local = std::move(lr);
    rec.cert.not_index_divisor = std::move(dk);
    rec.cert.cls = cls;
    rec.cert.wieferich_ok = F.wieferich_ok;
    rec.cert.p_divides_h = can_test;
    if (can_test) {
      rec.cert.s0 = in_s0(zell, cls, backend);
    } else {
      PrimeIdealHNF q = prime_above_deg1(zell, F);
      rec.cert.s0.result = Tri::Unknown;
      rec.cert.s0.ell = zell;
      rec.cert.s0.root = q.root;
      rec.cert.s0.tested_power = 0;
    }
    rec.cert.root = rec.cert.s0.root;
    rec.result = rec.cert.s0.result;
    rec.cert.level = rec.result == Tri::True ? VerificationLevel::Full
                                             : VerificationLevel::LocalOnly;
    out.push_back(std::move(rec));
  };

  auto worker = [&] {
    for (;;) {
      std::size_t idx = next_interval.fetch_add(1);
      if (idx >= intervals.size() || abort.load()) break;
      std::vector<HuntRecord> out;
      try {
        auto [a, b] = intervals[idx];
        std::uint64_t fa = 0, fM = 1;
        if (opt.class_filter) {
          fa = mpz_class(opt.class_filter->first %
                         opt.class_filter->second).get_ui();
          fM = opt.class_filter->second.get_ui();
        }
        ProgressionSieve sieve(fa, fM, a, b);
        while (auto ell = sieve.next()) {
          if (abort.load()) return;
          process_ell(*ell, out);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!error) error = std::current_exception();
        abort.store(true);
        cv.notify_all();
        return;
      }
      std::lock_guard<std::mutex> lk(mu);
      done[idx] = std::move(out);
      cv.notify_all();
    }
  };

  unsigned jobs = opt.jobs ? opt.jobs : 1;
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < jobs && i < intervals.size() + 1; ++i)
    pool.emplace_back(worker);

  auto commit_checkpoint = [&] {
    if (!opt.checkpoint_path.empty())
      atomic_write(opt.checkpoint_path, state_to_json(st).dump() + "\n");
  };

  for (std::size_t i = 0; i < intervals.size(); ++i) {
    std::vector<HuntRecord> batch;
    {
      std::unique_lock<std::mutex> lk(mu);
      cv.wait(lk, [&] { return done.count(i) || abort.load(); });
      if (!done.count(i)) break;  // aborted before this interval finished
      batch = std::move(done[i]);
      done.erase(i);
    }
    for (const HuntRecord& rec : batch) {
      ++st.candidates_in_s;
      if (rec.result == Tri::True) {
        ++st.confirmed_s0;
        if (!st.min_confirmed || rec.cert.ell < *st.min_confirmed)
          st.min_confirmed = rec.cert.ell;
        if (!st.max_confirmed || rec.cert.ell > *st.max_confirmed)
          st.max_confirmed = rec.cert.ell;
        if (fout) {
          std::string line = certificate_json(rec.cert);
          std::fputs(line.c_str(), fout);
          std::fputc('\n', fout);
        }
        if (emit) emit(rec.cert);
      } else if (rec.result == Tri::Unknown) {
        ++st.unknown;
        if (fcand) {
          std::string line = certificate_json(rec.cert);
          std::fputs(line.c_str(), fcand);
          std::fputc('\n', fcand);
        }
        if (emit) emit(rec.cert);
      }
      // definite non-members count toward candidates_in_s only
    }
    st.cursor = intervals[i].second;
    if (fout) std::fflush(fout);
    if (fcand) std::fflush(fcand);
    commit_checkpoint();
  }

  for (auto& t : pool) t.join();
  if (fout) std::fclose(fout);
  if (fcand) std::fclose(fcand);
  if (error) {
    commit_checkpoint();  // resumable at the last committed interval
    std::rethrow_exception(error);
  }
  st.cursor = st.hi;
  commit_checkpoint();
  return st;
}

VerifyOutcome verify_certificate(const CounterexampleCertificate& cert,
                                 const BackendConfig* backend,
                                 const std::string& cache_dir) {
  VerifyOutcome out;
  auto bad = [&](const std::string& what) {
    out.ok = false;
    out.failures.push_back(what);
  };

  mpz_class zp(cert.p);
  if (cert.p < 3 || !is_prime(zp)) bad("p is not an odd prime");
  if (!is_prime(cert.ell)) bad("ell is not prime");
  if (cert.ell == zp) bad("ell = p is excluded from S");
  if (cert.ell % cert.p == 1) bad("ell = 1 (mod p)");
  if (mpz_divisible_p(cert.c.get_mpz_t(), cert.ell.get_mpz_t()))
    bad("ell divides c");
  if (!out.ok) return out;

  PureFieldParams F;
  try {
    F = field_data(cert.p, cert.c);
  } catch (const std::exception& e) {
    bad(std::string("field data: ") + e.what());
    return out;
  }
  if (F.wieferich_ok != cert.wieferich_ok)
    bad("condition 1 flag does not replay");

  // Dedekind transcript
  DedekindCheck dk = dedekind_at(cert.ell, F);
  if (dk.divides_index) bad("ell divides the index");
  if (cert.not_index_divisor.ell != cert.ell ||
      cert.not_index_divisor.divides_index != dk.divides_index ||
      cert.not_index_divisor.transcript != dk.transcript)
    bad("dedekind record does not replay");

  // the p-th root of c mod ell
  if (cert.root < 0 || cert.root >= cert.ell) {
    bad("root out of range");
  } else {
    mpz_class pw;
    mpz_powm(pw.get_mpz_t(), cert.root.get_mpz_t(), zp.get_mpz_t(),
             cert.ell.get_mpz_t());
    if (pw != cert.c % cert.ell) bad("root^p != c (mod ell)");
  }
  if (cert.s0.ell != cert.ell) bad("s0 evidence names a different ell");
  if (cert.s0.root != cert.root) bad("s0 evidence names a different root");

  // local checks: coverage, then per-q replay
  {
    std::vector<std::uint64_t> mandatory{cert.p};
    for (const auto& [q, m] : factorize(cert.c)) {
      (void)m;
      if (q.fits_ulong_p()) mandatory.push_back(q.get_ui());
    }
    if (cert.ell.fits_ulong_p()) mandatory.push_back(cert.ell.get_ui());
    ExceptionalSet exc = cache_dir.empty()
                             ? exceptional_primes(cert.p)
                             : exceptional_primes_cached(cert.p, cache_dir);
    for (std::uint32_t q : exc.primes) mandatory.push_back(q);
    for (std::uint64_t q : mandatory) {
      if (std::find(cert.local.checked.begin(), cert.local.checked.end(),
                    q) == cert.local.checked.end())
        bad("local report misses mandatory q = " + std::to_string(q));
    }
    if (!std::is_sorted(cert.local.checked.begin(),
                        cert.local.checked.end()))
      bad("local checked list is not ascending");
    if (cert.local.checks.size() != cert.local.checked.size())
      bad("local checks and checked lists disagree");
    bool all_ok = true;
    DiagonalCurve curve{cert.p, 1, cert.ell, cert.c};
    for (const LocalCheck& ch : cert.local.checks) {
      QpResult redo = solvable_qq(curve, ch.q);
      if (redo.solvable != ch.result.solvable) {
        bad("local verdict at q = " + std::to_string(ch.q) +
            " does not replay");
        all_ok = false;
        continue;
      }
      if (redo.method != ch.result.method)
        bad("local method at q = " + std::to_string(ch.q) +
            " does not replay");
      if (ch.result.solvable) {
        if (!ch.result.witness ||
            !verify_hensel_witness(curve, ch.q, *ch.result.witness)) {
          bad("hensel witness at q = " + std::to_string(ch.q) + " invalid");
          all_ok = false;
        }
      } else {
        all_ok = false;
        if (redo.exhausted_level != ch.result.exhausted_level)
          bad("exhaustion level at q = " + std::to_string(ch.q) +
              " does not replay");
      }
    }
    if (cert.local.no_obstruction != all_ok)
      bad("no_obstruction flag disagrees with the checks");
    if (cert.local.no_obstruction && cert.local.obstructed_at)
      bad("obstructed_at set on an unobstructed report");
  }

  // class data arithmetic
  {
    const ClassGroupData& cd = cert.cls;
    mpz_class h = 1;
    for (size_t i = 0; i < cd.invariants.size(); ++i) {
      if (cd.invariants[i] < 2) bad("class invariant below 2");
      if (i + 1 < cd.invariants.size() &&
          cd.invariants[i + 1] % cd.invariants[i] != 0)
        bad("class invariants are not a divisibility chain");
      h *= cd.invariants[i];
    }
    if (h != cd.h) bad("h is not the product of the invariants");
    mpz_class e = cd.invariants.empty() ? mpz_class(1) : cd.invariants.back();
    if (e != cd.e) bad("e is not the last invariant");
    if (static_cast<int>(cd.r) != valuation(cd.e, zp)) bad("r != v_p(e)");
    unsigned N = 0;
    for (const auto& d : cd.invariants)
      if (valuation(d, zp) == static_cast<int>(cd.r)) ++N;
    if (N != cd.N) bad("N does not recount");
    bool pdh = mpz_divisible_ui_p(cd.h.get_mpz_t(), cert.p) != 0;
    if (pdh != cert.p_divides_h) bad("condition 2 flag does not replay");
    if (backend) {
      try {
        ClassGroupData again = class_data(F, *backend);
        if (again.invariants != cd.invariants)
          bad("class data disagrees with the backend");
      } catch (const std::exception& e2) {
        bad(std::string("class data replay: ") + e2.what());
      }
    }
  }

  // S0 evidence at the stated level
  if (cert.level == VerificationLevel::Full) {
    if (cert.s0.result != Tri::True)
      bad("full level without confirming s0 evidence");
    if (!cert.p_divides_h) {
      bad("full level requires p | h");
    } else {
      mpz_class pr = pow_mpz(zp, cert.cls.r);
      if (cert.s0.tested_power * cert.p != cert.cls.e)
        bad("tested power is not e/p");
      bool evidenced = false;
      if (cert.s0.class_order) {
        const mpz_class& m = *cert.s0.class_order;
        if (!mpz_divisible_p(cert.cls.h.get_mpz_t(), m.get_mpz_t()))
          bad("claimed class order does not divide h");
        else if (!mpz_divisible_p(m.get_mpz_t(), pr.get_mpz_t()))
          bad("claimed class order is not divisible by p^r");
        else
          evidenced = true;
      }
      if (!evidenced && cert.s0.verdict &&
          cert.s0.verdict->status == Principality::NotPrincipal &&
          cert.s0.verdict->class_order && *cert.s0.verdict->class_order > 1)
        evidenced = true;
      if (!evidenced) bad("full level lacks non-principality evidence");
      if (backend) {
        try {
          S0Evidence again = in_s0(cert.ell, cert.cls, *backend);
          if (again.result == Tri::False)
            bad("backend contradicts the S0 claim");
          else if (again.result == Tri::True && cert.s0.class_order &&
                   again.class_order &&
                   *again.class_order != *cert.s0.class_order)
            bad("class order of [q] does not replay");
        } catch (const std::exception& e2) {
          bad(std::string("s0 replay: ") + e2.what());
        }
      }
    }
  }
  return out;
}

}  // namespace hasse
