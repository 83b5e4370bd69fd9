#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hasse/classgroup.hpp>
#include <hasse/field.hpp>
#include <hasse/oracle.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace hasse;

namespace {

std::string mock_cmd() {
  return std::string("python3 ") + HASSE_SOURCE_DIR "/tests/mock_oracle.py";
}

std::string fresh_dir(const char* tag) {
  auto d = std::filesystem::temp_directory_path() /
           (std::string("cg_test_") + tag + "_" + std::to_string(getpid()));
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d.string();
}


BackendConfig declared_be() { return BackendConfig{}; }

BackendConfig builtin_be() {
  BackendConfig b;
  b.kind = Backend::Builtin;
  return b;
}

BackendConfig oracle_be(const std::string& cache) {
  BackendConfig b;
  b.kind = Backend::Oracle;
  b.oracle_cmd = mock_cmd();
  b.oracle_cache = cache;
  return b;
}

std::vector<mpz_class> zs(std::vector<long> v) {
  return std::vector<mpz_class>(v.begin(), v.end());
}

}  // namespace

TEST_CASE("declared table covers the shipped pairs") {
  auto be = declared_be();
  struct Row {
    std::uint64_t p;
    long c;
    std::vector<long> inv;
    long h, e;
    unsigned r, N;
  };
  for (const Row& row : std::vector<Row>{
           {3, 921, {3, 3}, 9, 3, 1, 2},
           {5, 19, {5}, 5, 5, 1, 1},
           {7, 13, {7}, 7, 7, 1, 1},
           {11, 373, {11, 11}, 121, 11, 1, 2},
           {13, 103, {13}, 13, 13, 1, 1},
           {17, 1087, {17}, 17, 17, 1, 1},
           {19, 37, {19}, 19, 19, 1, 1}}) {
    auto cls = class_data(field_data(row.p, row.c), be);
    CHECK(cls.invariants == zs(row.inv));
    CHECK(cls.h == row.h);
    CHECK(cls.e == row.e);
    CHECK(cls.r == row.r);
    CHECK(cls.N == row.N);
    CHECK(cls.source == "declared");
  }
  CHECK_THROWS_WITH_AS((void)class_data(field_data(3, 5), be),
                       doctest::Contains("backend failure"),
                       std::runtime_error);
}

TEST_CASE("declared backend accepts a user table file") {
  auto dir = fresh_dir("tbl");
  auto path = dir + "/pairs.json";
  std::ofstream(path)
      << R"({"pairs": [{"p": 3, "c": "5", "invariants": ["2", "4"]}]})";
  auto be = declared_be();
  be.declared_path = path;
  auto cls = class_data(field_data(3, 5), be);
  CHECK(cls.invariants == zs({2, 4}));
  CHECK(cls.h == 8);
  CHECK(cls.e == 4);
  CHECK(cls.r == 0);
  CHECK(cls.N == 2);

  // divisibility chain is validated, not trusted
  std::ofstream(path)
      << R"({"pairs": [{"p": 3, "c": "5", "invariants": ["2", "3"]}]})";
  CHECK_THROWS_WITH_AS((void)class_data(field_data(3, 5), be),
                       doctest::Contains("backend failure"),
                       std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("builtin backend, p = 3") {
  auto be = builtin_be();
  auto cls = class_data(field_data(3, 921), be);
  CHECK(cls.invariants == zs({3, 3}));
  CHECK(cls.h == 9);
  CHECK(cls.source == "builtin");

  auto trivial = class_data(field_data(3, 10), be);
  CHECK(trivial.h == 1);
  CHECK(trivial.invariants.empty());
  CHECK(trivial.e == 1);
  CHECK(trivial.r == 0);
  CHECK(trivial.N == 0);

  CHECK(class_data(field_data(3, 2), be).h == 1);
  CHECK(class_data(field_data(3, 7), be).invariants == zs({3}));
  CHECK(class_data(field_data(3, 11), be).invariants == zs({2}));
}

TEST_CASE("builtin class groups stop at p = 3") {
  auto be = builtin_be();
  CHECK_THROWS_WITH_AS((void)class_data(field_data(5, 19), be),
                       doctest::Contains("backend failure"),
                       std::runtime_error);
}

TEST_CASE("oracle client speaks the wire protocol") {
  auto cache = fresh_dir("wire");
  OracleClient client(mock_cmd(), cache);
  auto inv = client.class_group(5, 19);
  REQUIRE(inv.size() == 1);
  CHECK(inv[0] == 5);
  // the mock answers each distinct request once; a repeat served from the
  // reply cache proves the cache short-circuits the subprocess
  CHECK(client.class_group(5, 19) == inv);

  CHECK(client.ideal_class_order(5, 19, 13, 2) == 1);
  CHECK(client.ideal_class_order(5, 19, 1657, 648) == 5);

  CHECK_THROWS_WITH_AS((void)client.class_group(11, 373),
                       doctest::Contains("backend failure"),
                       std::runtime_error);
  std::filesystem::remove_all(cache);
}

TEST_CASE("oracle repeats fail without a cache (mock is one-shot)") {
  OracleClient client(mock_cmd(), "");
  CHECK(client.class_group(5, 19) == zs({5}));
  CHECK_THROWS_WITH_AS((void)client.class_group(5, 19),
                       doctest::Contains("backend failure"),
                       std::runtime_error);
}

TEST_CASE("class data through the oracle") {
  auto cache = fresh_dir("cd");
  auto be = oracle_be(cache);
  auto cls = class_data(field_data(5, 19), be);
  CHECK(cls.invariants == zs({5}));
  CHECK(cls.h == 5);
  CHECK(cls.r == 1);
  CHECK(cls.N == 1);
  CHECK(cls.source == "oracle");
  std::filesystem::remove_all(cache);
}

TEST_CASE("principality through the oracle") {
  auto cache = fresh_dir("pr");
  auto be = oracle_be(cache);
  auto F = field_data(5, 19);

  auto v13 = is_principal(prime_above_deg1(13, F).ideal, be);
  CHECK(v13.status == Principality::Principal);
  REQUIRE(v13.generator.has_value());
  CHECK((*v13.generator)[0] == 2);   // generator 2 - theta from the oracle
  CHECK((*v13.generator)[1] == -1);

  auto v1657 = is_principal(prime_above_deg1(1657, F).ideal, be);
  CHECK(v1657.status == Principality::NotPrincipal);
  REQUIRE(v1657.class_order.has_value());
  CHECK(*v1657.class_order == 5);

  auto unit = is_principal(unit_ideal(F), be);
  CHECK(unit.status == Principality::Principal);
  std::filesystem::remove_all(cache);
}

TEST_CASE("S0 membership through the oracle") {
  auto cache = fresh_dir("s0");
  auto be = oracle_be(cache);
  auto cls = class_data(field_data(5, 19), be);

  auto e13 = in_s0(13, cls, be);
  CHECK(e13.result == Tri::False);  // q13 = (theta - 2) is principal
  CHECK(e13.tested_power == 1);
  REQUIRE(e13.class_order.has_value());
  CHECK(*e13.class_order == 1);

  auto e1657 = in_s0(1657, cls, be);
  CHECK(e1657.result == Tri::True);
  CHECK(*e1657.class_order == 5);
  CHECK(e1657.root == 648);  // 648^5 = 19 (mod 1657)

  auto far = in_s0(95707, cls, be);
  CHECK(far.result == Tri::True);
  CHECK(*far.class_order == 5);
  std::filesystem::remove_all(cache);
}

TEST_CASE("S0 membership with the builtin engine (p = 3)") {
  auto be = builtin_be();
  auto cls = class_data(field_data(3, 921), be);
  CHECK(in_s0(2, cls, be).result == Tri::True);
  CHECK(in_s0(101, cls, be).result == Tri::False);  // q_101 principal
  CHECK(*in_s0(101, cls, be).class_order == 1);
  CHECK(in_s0(167, cls, be).result == Tri::False);
  CHECK(*in_s0(563, cls, be).class_order == 3);
}

TEST_CASE("declared backend cannot decide S0") {
  auto be = declared_be();
  auto cls = class_data(field_data(5, 19), be);
  auto e = in_s0(13, cls, be);
  CHECK(e.result == Tri::Unknown);
  CHECK(e.tested_power == 1);
}

TEST_CASE("in_s0 requires p | h") {
  auto be = builtin_be();
  auto cls = class_data(field_data(3, 2), be);  // h = 1
  CHECK_THROWS_AS((void)in_s0(5, cls, be), std::invalid_argument);
}

TEST_CASE("builtin generator search for p >= 5") {
  auto declared = declared_be();
  auto be = builtin_be();
  auto F = field_data(5, 19);

  auto v13 = is_principal(prime_above_deg1(13, F).ideal, be);
  CHECK(v13.status == Principality::Principal);
  REQUIRE(v13.generator.has_value());
  // the found generator must have the right norm: +-13
  std::vector<mpz_class> g;
  for (auto& x : *v13.generator) {
    REQUIRE(x.get_den() == 1);
    g.push_back(x.get_num());
  }
  mpz_class n = element_norm(g, F);
  CHECK((n == 13 || n == -13));

  auto v1657 = is_principal(prime_above_deg1(1657, F).ideal, be);
  CHECK(v1657.status == Principality::Unknown);  // really not principal
  CHECK(v1657.search_bound.has_value());

  CHECK(is_principal(unit_ideal(F), be).status == Principality::Principal);

  // Unknown propagates into in_s0 via the declared invariants
  auto cls = class_data(F, declared);
  auto e = in_s0(1657, cls, be);
  CHECK(e.result == Tri::Unknown);
  auto e13 = in_s0(13, cls, be);
  CHECK(e13.result == Tri::False);  // positive principality certificate
}

TEST_CASE("builtin principality is exact for p = 3") {
  auto be = builtin_be();
  auto F = field_data(3, 921);
  auto principal = is_principal(prime_above_deg1(101, F).ideal, be);
  CHECK(principal.status == Principality::Principal);
  REQUIRE(principal.generator.has_value());

  auto nope = is_principal(prime_above_deg1(2, F).ideal, be);
  CHECK(nope.status == Principality::NotPrincipal);
  REQUIRE(nope.class_order.has_value());
  CHECK(*nope.class_order == 3);
}

TEST_CASE("empirical principal density (builtin, p = 3)") {
  auto be = builtin_be();
  auto cls = class_data(field_data(3, 921), be);
  auto est = empirical_principal_density(cls, 2000, be);
  CHECK(est.X == 2000);
  CHECK(est.sample > 50);
  CHECK(est.principal <= est.sample);
  mpq_class ratio((long)est.principal, (long)est.sample);
  ratio.canonicalize();
  CHECK(est.estimate == ratio);
  CHECK(est.expected == mpq_class(1, 9));
  CHECK(est.estimate > 0);
  CHECK(est.estimate < mpq_class(1, 2));

  auto declared = declared_be();
  CHECK_THROWS_AS((void)empirical_principal_density(cls, 1000, declared),
                  std::runtime_error);

  auto tiny = class_data(field_data(3, 2), be);
  CHECK_THROWS_WITH_AS((void)empirical_principal_density(tiny, 3, be),
                       doctest::Contains("empty sample"), std::runtime_error);
}
