// Command-line front end: analyze pairs, list exceptional primes, build
// density certificates, test local solvability, hunt prime ranges for
// certified Hasse-principle violations, and re-verify certificate files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <gmpxx.h>

#include "hasse/arith.hpp"
#include "hasse/classgroup.hpp"
#include "hasse/density.hpp"
#include "hasse/exceptional.hpp"
#include "hasse/field.hpp"
#include "hasse/hunter.hpp"
#include "hasse/local.hpp"

namespace {

struct BackendFlags {
  std::string kind = "declared";
  std::string oracle_cmd;
  std::string oracle_cache;
  std::string declared_path;
};

void add_backend_flags(CLI::App* cmd, BackendFlags* flags) {
  cmd->add_option("--backend", flags->kind,
                  "class-group backend: declared, oracle or builtin")
      ->check(CLI::IsMember({"declared", "oracle", "builtin"}))
      ->capture_default_str();
  cmd->add_option("--oracle-cmd", flags->oracle_cmd,
                  "command for the JSON-lines computer-algebra bridge "
                  "(run through /bin/sh -c)");
  cmd->add_option("--oracle-cache", flags->oracle_cache,
                  "directory for cached oracle replies");
  cmd->add_option("--declared", flags->declared_path,
                  "JSON table of declared class groups "
                  "(default: the bundled pairs)");
}

hasse::BackendConfig to_config(const BackendFlags& flags) {
  hasse::BackendConfig cfg;
  if (flags.kind == "oracle") cfg.kind = hasse::Backend::Oracle;
  else if (flags.kind == "builtin") cfg.kind = hasse::Backend::Builtin;
  else cfg.kind = hasse::Backend::Declared;
  cfg.oracle_cmd = flags.oracle_cmd;
  cfg.oracle_cache = flags.oracle_cache;
  cfg.declared_path = flags.declared_path;
  return cfg;
}

mpz_class parse_mpz(const std::string& text, const char* what) {
  mpz_class v;
  if (v.set_str(text, 10) != 0)
    throw CLI::ValidationError(std::string(what) + ": not an integer: " + text);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hassehunter: certified violations of the Hasse principle among the "
      "curves x^p + ell y^p + c z^p = 0.\n"
      "Primality checks on inputs beyond 64 bits are Miller-Rabin "
      "(probabilistic with error < 4^-64); everything else is exact."};
  app.require_subcommand(1);

  std::string cache_dir;
  app.add_option("--cache", cache_dir,
                 "cache directory for exceptional-prime scans")
      ->capture_default_str();

  // ---- analyze ----
  auto* cmd_analyze = app.add_subcommand(
      "analyze", "field, class-group, exceptional and density report for "
                 "(p, c), with the final verdict");
  std::uint64_t a_p = 0;
  std::string a_c;
  BackendFlags a_flags;
  cmd_analyze->add_option("--p", a_p, "odd prime exponent")->required();
  cmd_analyze->add_option("--c", a_c, "coefficient c >= 2, p-th-power-free")
      ->required();
  add_backend_flags(cmd_analyze, &a_flags);

  // ---- exceptional ----
  auto* cmd_exc = app.add_subcommand(
      "exceptional", "primes q where some curve of exponent p has no "
                     "F_q-point (all q = 1 mod p below the Weil bound)");
  std::uint64_t e_p = 0;
  bool e_refresh = false;
  cmd_exc->add_option("--p", e_p, "odd prime exponent")->required();
  cmd_exc->add_flag("--refresh", e_refresh, "ignore any cached scan");

  // ---- density ----
  auto* cmd_density = app.add_subcommand(
      "density", "exact density certificate for the admissible classes of "
                 "ell, compared against 1/p^N");
  std::uint64_t d_p = 0;
  std::string d_c;
  BackendFlags d_flags;
  cmd_density->add_option("--p", d_p, "odd prime exponent")->required();
  cmd_density->add_option("--c", d_c, "coefficient c")->required();
  add_backend_flags(cmd_density, &d_flags);

  // ---- local ----
  auto* cmd_local = app.add_subcommand(
      "local", "solvability of a x^p + b y^p + c z^p = 0 over Q_q "
               "(all mandatory q when --q is absent)");
  std::uint64_t l_p = 0, l_q = 0;
  std::string l_a, l_b, l_c;
  cmd_local->add_option("--p", l_p, "odd prime exponent")->required();
  cmd_local->add_option("--a", l_a, "coefficient a")->required();
  cmd_local->add_option("--b", l_b, "coefficient b")->required();
  cmd_local->add_option("--c", l_c, "coefficient c")->required();
  cmd_local->add_option("--q", l_q, "test only this prime q");

  // ---- hunt ----
  auto* cmd_hunt = app.add_subcommand(
      "hunt", "walk primes ell in [min, max], certify members of S0, file "
              "undecided ones as candidates");
  std::uint64_t h_p = 0, h_jobs = 1;
  std::string h_c, h_min = "2", h_max, h_class, h_out, h_cand, h_ckpt;
  bool h_force = false;
  BackendFlags h_flags;
  cmd_hunt->add_option("--p", h_p, "odd prime exponent")->required();
  cmd_hunt->add_option("--c", h_c, "coefficient c")->required();
  cmd_hunt->add_option("--max", h_max, "range end (inclusive)")->required();
  cmd_hunt->add_option("--min", h_min, "range start")->capture_default_str();
  cmd_hunt->add_option("--class", h_class,
                       "restrict to ell = A (mod M), written A:M");
  cmd_hunt->add_option("--out", h_out,
                       "confirmed certificates, one JSON per line "
                       "(default: standard output)");
  cmd_hunt->add_option("--candidates", h_cand,
                       "undecided records (default: <out>.candidates.jsonl "
                       "when --out is set)");
  cmd_hunt->add_option("--checkpoint", h_ckpt,
                       "resumable state file (atomic JSON)");
  cmd_hunt->add_option("--jobs", h_jobs, "worker threads")
      ->capture_default_str();
  cmd_hunt->add_flag("--force", h_force,
                     "hunt even when the analysis verdict is negative");
  add_backend_flags(cmd_hunt, &h_flags);

  // ---- verify ----
  auto* cmd_verify = app.add_subcommand(
      "verify", "replay a certificate file line by line; nonzero exit on "
                "any failure");
  std::string v_file;
  BackendFlags v_flags;
  cmd_verify->add_option("file", v_file, "JSONL certificate file")
      ->required();
  add_backend_flags(cmd_verify, &v_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_analyze) {
      auto rep = hasse::analyze(a_p, parse_mpz(a_c, "--c"),
                                to_config(a_flags), cache_dir);
      std::cout << hasse::analysis_json(rep) << "\n";
      return rep.s0_infinite ? 0 : 1;
    }

    if (*cmd_exc) {
      hasse::ExceptionalSet set =
          cache_dir.empty()
              ? hasse::exceptional_primes(e_p)
              : hasse::exceptional_primes_cached(e_p, cache_dir, e_refresh);
      std::cout << hasse::exceptional_json(set) << "\n";
      return 0;
    }

    if (*cmd_density) {
      auto field = hasse::field_data(d_p, parse_mpz(d_c, "--c"));
      auto cls = hasse::class_data(field, to_config(d_flags));
      auto exc = cache_dir.empty()
                     ? hasse::exceptional_primes(d_p)
                     : hasse::exceptional_primes_cached(d_p, cache_dir);
      auto cert = hasse::density_certificate(field, cls, exc);
      std::cout << hasse::density_json(cert) << "\n";
      return cert.passes ? 0 : 1;
    }

    if (*cmd_local) {
      hasse::DiagonalCurve curve{l_p, parse_mpz(l_a, "--a"),
                                 parse_mpz(l_b, "--b"),
                                 parse_mpz(l_c, "--c")};
      if (curve.a == 0 || curve.b == 0 || curve.c == 0)
        throw std::invalid_argument("coefficients must be nonzero");
      std::vector<std::uint64_t> qs;
      if (cmd_local->count("--q")) {
        qs.push_back(l_q);
      } else {
        qs.push_back(l_p);
        mpz_class abc = curve.a * curve.b * curve.c;
        for (const auto& [prime, m] : hasse::factorize(abc)) {
          (void)m;
          if (prime.fits_ulong_p() && prime.get_ui() != l_p)
            qs.push_back(prime.get_ui());
        }
        auto exc = cache_dir.empty()
                       ? hasse::exceptional_primes(l_p)
                       : hasse::exceptional_primes_cached(l_p, cache_dir);
        for (std::uint32_t q : exc.primes) qs.push_back(q);
        std::sort(qs.begin(), qs.end());
        qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
      }
      hasse::LocalReport rep;
      rep.no_obstruction = true;
      for (std::uint64_t q : qs) {
        hasse::QpResult res = hasse::solvable_qq(curve, q);
        if (!res.solvable && !rep.obstructed_at) rep.obstructed_at = q;
        rep.no_obstruction = rep.no_obstruction && res.solvable;
        rep.checked.push_back(q);
        rep.checks.push_back(hasse::LocalCheck{q, std::move(res)});
      }
      std::cout << hasse::local_report_json(rep) << "\n";
      return rep.no_obstruction ? 0 : 1;
    }

    if (*cmd_hunt) {
      hasse::HuntOptions opt;
      opt.lo = parse_mpz(h_min, "--min");
      opt.hi = parse_mpz(h_max, "--max");
      if (!h_class.empty()) {
        auto colon = h_class.find(':');
        if (colon == std::string::npos)
          throw std::invalid_argument("--class expects A:M");
        opt.class_filter = {parse_mpz(h_class.substr(0, colon), "--class A"),
                            parse_mpz(h_class.substr(colon + 1), "--class M")};
      }
      opt.jobs = static_cast<unsigned>(h_jobs);
      opt.force = h_force;
      opt.out_path = h_out;
      opt.candidates_path = h_cand;
      if (opt.candidates_path.empty() && !h_out.empty())
        opt.candidates_path = h_out + ".candidates.jsonl";
      opt.checkpoint_path = h_ckpt;
      opt.cache_dir = cache_dir;
      auto on_record = [&](const hasse::CounterexampleCertificate& cert) {
        if (h_out.empty())
          std::cout << hasse::certificate_json(cert) << "\n";
      };
      hasse::HuntState st = hasse::hunt(h_p, parse_mpz(h_c, "--c"),
                                        to_config(h_flags), opt, on_record);
      std::ostream& state_out = h_out.empty() ? std::cerr : std::cout;
      state_out << hasse::hunt_state_json(st) << "\n";
      return 0;
    }

    if (*cmd_verify) {
      std::ifstream in(v_file);
      if (!in) {
        std::cerr << "error: cannot open " << v_file << "\n";
        return 2;
      }
      hasse::BackendConfig cfg = to_config(v_flags);
      const bool with_backend = cmd_verify->count("--backend") > 0;
      std::string line;
      std::size_t lineno = 0;
      int failures = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string verdict;
        try {
          auto cert = hasse::certificate_from_json(line);
          auto outcome = hasse::verify_certificate(
              cert, with_backend ? &cfg : nullptr, cache_dir);
          if (outcome.ok) {
            verdict = "ok";
          } else {
            ++failures;
            verdict = "FAIL:";
            for (const auto& f : outcome.failures) verdict += " [" + f + "]";
          }
        } catch (const std::exception& e) {
          ++failures;
          verdict = std::string("FAIL: [") + e.what() + "]";
        }
        std::cout << "line " << lineno << ": " << verdict << "\n";
      }
      return failures ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
