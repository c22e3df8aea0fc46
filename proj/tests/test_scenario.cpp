#include <cmath>

#include <doctest.h>

#include "detaps/errors.hpp"
#include "detaps/scenario.hpp"

using namespace detaps;
using namespace detaps::sim;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::ConfigError;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const auto c = ScenarioConfig::parse(
      "# smoke\n"
      "n = 10\n"
      "t=5\n"
      "t_prime=3   # notaries per signature\n"
      "n4=10\n"
      "phases=sign,combine\n");
  CHECK(c.n == 10);
  CHECK(c.t == 5);
  CHECK(c.t_prime == 3);
  CHECK(c.num_signatures == 10);
  CHECK(c.has_phase("setup"));
  CHECK(c.has_phase("combine"));
  CHECK_FALSE(c.has_phase("trace"));
  c.validate();
  CHECK(ScenarioConfig::parse(
            [&] {
              std::string s;
              for (const auto& [k, v] : c.records()) s += k + "=" + v + "\n";
              return s;
            }())
            .records() == c.records());

  CHECK(code_of([] { ScenarioConfig::parse("bogus=1"); }) == Errc::ConfigError);
  CHECK(code_of([] { ScenarioConfig::parse("n=ten"); }) == Errc::ConfigError);
  CHECK(code_of([] { ScenarioConfig::parse("n 10"); }) == Errc::ConfigError);
  auto bad = c;
  bad.t_prime = 11;
  CHECK(code_of([&] { bad.validate(); }) == Errc::ConfigError);
  CHECK(code_of([&] { run_scenario(bad); }) == Errc::ConfigError);
  bad = c;
  bad.t = 11;
  CHECK(code_of([&] { bad.validate(); }) == Errc::ConfigError);
  bad = c;
  bad.phases = {"sign", "trace"};
  CHECK(code_of([&] { bad.validate(); }) == Errc::ConfigError);
  bad.phases = {"sign", "dance"};
  CHECK(code_of([&] { bad.validate(); }) == Errc::ConfigError);

  CHECK(c.out_of_table_range());
  ScenarioConfig in_range;
  in_range.num_signatures = 100;
  in_range.t_prime = 5;
  CHECK_FALSE(in_range.out_of_table_range());
}

TEST_CASE("grid expansion and linear fit") {
  ScenarioConfig base;
  const auto grid = expand_grid(base, {"t=5,10,15"});
  REQUIRE(grid.size() == 3);
  CHECK(grid[2].t == 15);
  CHECK(expand_grid(base, {}).size() == 1);
  CHECK(expand_grid(base, {"t=2,3", "n3=5,10"}).size() == 4);
  CHECK(code_of([&] { expand_grid(base, {"t"}); }) == Errc::ConfigError);

  CHECK(linear_r2({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  // Hand-computed: x = 1..4, y = 1, 3, 2, 4 -> r = 0.8.
  CHECK(linear_r2({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.64));
}

TEST_CASE("canonical smoke scenario passes and is reproducible") {
  ScenarioConfig c;
  c.n = 10;
  c.t = 5;
  c.t_prime = 3;
  c.n3 = 10;
  c.message_kb = 1;
  c.num_signatures = 10;
  c.seed = 1;
  const auto a = run_scenario(c);
  INFO(a.tsv());
  CHECK(a.passed());
  CHECK(a.signatures_emitted == 10);
  CHECK(a.verified == 10);
  CHECK(a.traced == 10);
  CHECK(a.responses == 30);
  CHECK(a.bytes.at("tx_sign") > 1024);
  CHECK(a.bytes.count("enclave_trace_output") == 1);
  const auto b = run_scenario(c, Exec::Serial);
  CHECK(a.tsv(false) == b.tsv(false));
  CHECK(a.chain_log == b.chain_log);
  CHECK(a.table().find("all checks passed") != std::string::npos);
}

TEST_CASE("phases can stop early") {
  ScenarioConfig c;
  c.n = 5;
  c.t = 2;
  c.n3 = 5;
  c.t_prime = 1;
  c.num_signatures = 3;
  c.message_kb = 0;
  c.phases = {"sign", "combine"};
  const auto r = run_scenario(c);
  CHECK(r.passed());
  CHECK(r.signatures_emitted == 3);
  CHECK(r.verified == 0);
  CHECK(r.bytes.count("tx_trapdoor") == 0);
}

TEST_CASE("Tx^Sign size column is constant across t'") {
  ScenarioConfig base;
  base.n = 5;
  base.t = 3;
  base.n3 = 5;
  base.num_signatures = 2;
  base.phases = {"sign", "combine", "verify"};
  const auto rows = bench(expand_grid(base, {"t_prime=1,2,3"}), 1);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.passed);
    CHECK(r.tx_sign_bytes == rows[0].tx_sign_bytes);
    CHECK(r.sigma_bytes == rows[0].sigma_bytes);
  }
  CHECK(bench_table(rows).find('\n') != std::string::npos);
}
