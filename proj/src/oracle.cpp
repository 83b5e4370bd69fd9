#include "hasse/oracle.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hasse {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("backend failure: " + what);
}

// mpz -> JSON; decimal string once the value leaves the exact-double range
// (keeps stock JSON parsers on the other side lossless).
json num(const mpz_class& v) {
  if (v.fits_slong_p()) {
    long s = v.get_si();
    if (s > -(1L << 53) && s < (1L << 53)) return json(s);
  }
  return json(v.get_str());
}

mpz_class parse_int(const json& v, const char* where) {
  if (v.is_number_integer()) return mpz_class(static_cast<long>(v.get<std::int64_t>()));
  if (v.is_number_unsigned()) {
    std::ostringstream os;
    os << v.get<std::uint64_t>();
    return mpz_class(os.str());
  }
  if (v.is_string()) {
    mpz_class r;
    if (r.set_str(v.get<std::string>(), 10) != 0)
      fail(std::string(where) + ": bad integer literal");
    return r;
  }
  fail(std::string(where) + ": expected integer");
}

mpq_class parse_rat(const json& v, const char* where) {
  if (v.is_string()) {
    mpq_class r;
    if (r.set_str(v.get<std::string>(), 10) != 0)
      fail(std::string(where) + ": bad rational literal");
    r.canonicalize();
    return r;
  }
  return mpq_class(parse_int(v, where));
}

// FNV-1a over the canonical request text; cache names stay filesystem-sized
// even for large HNF payloads.  The stored request is compared on load, so
// a collision degrades to a cache miss, never a wrong answer.
std::string fnv64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

struct OracleClient::Conn {
  pid_t pid = -1;
  int to_fd = -1;    // our writes -> child stdin
  FILE* from = nullptr;  // child stdout -> our reads
  std::uint64_t next_id = 1;
};

OracleClient::OracleClient(std::string command, std::string cache_dir)
    : command_(std::move(command)), cache_dir_(std::move(cache_dir)) {
  if (command_.empty()) fail("no oracle command configured");
  // write() must report a dead child as EPIPE instead of killing us.
  signal(SIGPIPE, SIG_IGN);
  if (!cache_dir_.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir_, ec);
  }
}

OracleClient::~OracleClient() {
  std::lock_guard<std::mutex> lk(mu_);
  for (Conn* c : all_) destroy(c);
  all_.clear();
  free_.clear();
}

OracleClient::Conn* OracleClient::acquire() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    if (!free_.empty()) {
      Conn* c = free_.back();
      free_.pop_back();
      return c;
    }
  }
  int in_pipe[2], out_pipe[2];  // in: us -> child, out: child -> us
  if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0)
    fail("pipe: " + std::string(std::strerror(errno)));
  pid_t pid = fork();
  if (pid < 0) fail("fork: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    prctl(PR_SET_PDEATHSIG, SIGKILL);
    dup2(in_pipe[0], 0);   // dup2 clears O_CLOEXEC on the copies
    dup2(out_pipe[1], 1);
    execl("/bin/sh", "sh", "-c", command_.c_str(), (char*)nullptr);
    std::fprintf(stderr, "exec failed: %s\n", std::strerror(errno));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  Conn* c = new Conn;
  c->pid = pid;
  c->to_fd = in_pipe[1];
  c->from = fdopen(out_pipe[0], "r");
  if (!c->from) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    delete c;
    fail("fdopen failed");
  }
  std::lock_guard<std::mutex> lk(mu_);
  all_.push_back(c);
  return c;
}

void OracleClient::release(Conn* conn) {
  std::lock_guard<std::mutex> lk(mu_);
  free_.push_back(conn);
}

void OracleClient::destroy(Conn* conn) {
  if (conn->to_fd >= 0) close(conn->to_fd);
  if (conn->from) fclose(conn->from);
  if (conn->pid > 0) {
    // polite: closed stdin asks the adapter to exit; escalate if it won't
    for (int i = 0; i < 200; ++i) {
      if (waitpid(conn->pid, nullptr, WNOHANG) != 0) {
        conn->pid = -1;
        break;
      }
      usleep(10'000);
    }
    if (conn->pid > 0) {
      kill(conn->pid, SIGKILL);
      waitpid(conn->pid, nullptr, 0);
    }
  }
  delete conn;
}

std::string OracleClient::call(const std::string& body,
                               const std::string& key) {
  std::string cache_path;
  if (!cache_dir_.empty() && !key.empty()) {
    cache_path = cache_dir_ + "/" + key + ".json";
    std::ifstream in(cache_path);
    if (in) {
      try {
        json entry = json::parse(in);
        if (entry.at("req") == json::parse(body))
          return entry.at("resp").dump();
      } catch (const json::exception&) {
        // unreadable entry: fall through and recompute
      }
    }
  }

  Conn* conn = acquire();
  std::string resp_text;
  try {
    json req = json::parse(body);
    std::uint64_t id = conn->next_id++;
    req["id"] = id;
    std::string line = req.dump();
    line.push_back('\n');
    size_t off = 0;
    while (off < line.size()) {
      ssize_t n = write(conn->to_fd, line.data() + off, line.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail("oracle write: " + std::string(std::strerror(errno)));
      }
      off += static_cast<size_t>(n);
    }

    char* buf = nullptr;
    size_t cap = 0;
    json resp;
    for (;;) {
      ssize_t n = getline(&buf, &cap, conn->from);
      if (n < 0) {
        free(buf);
        fail("oracle process closed its output (command: " + command_ + ")");
      }
      try {
        resp = json::parse(std::string(buf, static_cast<size_t>(n)));
      } catch (const json::exception&) {
        continue;  // banner or stray diagnostics; keep scanning
      }
      if (resp.is_object() && resp.contains("id") &&
          parse_int(resp["id"], "id") == mpz_class(static_cast<long>(id)))
        break;
    }
    free(buf);
    if (!resp.value("ok", false)) {
      std::string why = resp.contains("error") && resp["error"].is_string()
                            ? resp["error"].get<std::string>()
                            : "oracle reported an error";
      fail(why);
    }
    resp.erase("id");
    resp_text = resp.dump();
  } catch (...) {
    // connection state is unknown after any error: drop it
    {
      std::lock_guard<std::mutex> lk(mu_);
      all_.erase(std::find(all_.begin(), all_.end(), conn));
    }
    destroy(conn);
    throw;
  }
  release(conn);

  if (!cache_path.empty()) {
    json entry{{"req", json::parse(body)}, {"resp", json::parse(resp_text)}};
    std::string tmp = cache_path + ".tmp" + std::to_string(getpid());
    std::ofstream out(tmp);
    out << entry.dump() << "\n";
    out.close();
    if (out) std::rename(tmp.c_str(), cache_path.c_str());
    else std::remove(tmp.c_str());
  }
  return resp_text;
}

std::vector<mpz_class> OracleClient::class_group(std::uint64_t p,
                                                 const mpz_class& c) {
  json req{{"op", "class_group"}, {"p", p}, {"c", num(c)}};
  std::string key = "class_group_p" + std::to_string(p) + "_c" + c.get_str();
  json resp = json::parse(call(req.dump(), key));
  if (!resp.contains("invariants") || !resp["invariants"].is_array())
    fail("class_group: malformed reply");
  std::vector<mpz_class> inv;
  for (const auto& v : resp["invariants"])
    inv.push_back(parse_int(v, "invariants"));
  std::sort(inv.begin(), inv.end());
  while (!inv.empty() && inv.front() == 1) inv.erase(inv.begin());
  for (size_t i = 0; i + 1 < inv.size(); ++i) {
    if (inv[i] <= 0 || inv[i + 1] % inv[i] != 0)
      fail("class_group: invariants are not a divisibility chain");
  }
  if (!inv.empty() && inv.back() <= 0) fail("class_group: bad invariant");
  return inv;
}

mpz_class OracleClient::ideal_class_order(std::uint64_t p, const mpz_class& c,
                                          const mpz_class& ell,
                                          const mpz_class& root) {
  json req{{"op", "ideal_class_order"},
           {"p", p},
           {"c", num(c)},
           {"ell", num(ell)},
           {"root", num(root)}};
  std::string key = "ideal_class_order_p" + std::to_string(p) + "_c" +
                    c.get_str() + "_l" + ell.get_str();
  json resp = json::parse(call(req.dump(), key));
  if (!resp.contains("order")) fail("ideal_class_order: malformed reply");
  mpz_class m = parse_int(resp["order"], "order");
  if (m <= 0) fail("ideal_class_order: nonpositive order");
  return m;
}

OracleClient::Principality OracleClient::is_principal(std::uint64_t p,
                                                      const mpz_class& c,
                                                      const MatZ& hnf) {
  json rows = json::array();
  for (size_t i = 0; i < hnf.rows; ++i) {
    json row = json::array();
    for (size_t j = 0; j < hnf.cols; ++j) row.push_back(num(hnf.at(i, j)));
    rows.push_back(row);
  }
  json req{{"op", "is_principal"}, {"p", p}, {"c", num(c)}, {"hnf", rows}};
  std::string key = "is_principal_p" + std::to_string(p) + "_c" + c.get_str() +
                    "_h" + fnv64(rows.dump());
  json resp = json::parse(call(req.dump(), key));
  if (!resp.contains("principal") || !resp["principal"].is_boolean())
    fail("is_principal: malformed reply");
  Principality out;
  out.principal = resp["principal"].get<bool>();
  if (out.principal) {
    if (!resp.contains("generator") || !resp["generator"].is_array())
      fail("is_principal: principal reply without generator");
    std::vector<mpq_class> gen;
    for (const auto& v : resp["generator"])
      gen.push_back(parse_rat(v, "generator"));
    out.generator = std::move(gen);
  }
  return out;
}

}  // namespace hasse
