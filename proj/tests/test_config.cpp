#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "relopt/output.hpp"
#include "relopt/run_config.hpp"
#include "relopt/runs.hpp"

using namespace relopt;

TEST_SUITE_BEGIN("config");

TEST_CASE("parse, serialize, parse is the identity") {
  const std::string text = R"({
    "problem": "linear",
    "seed": 42,
    "beta_targets": [3.0, 4.5],
    "subset": {"samples_per_level": 2000},
    "linear": {"dimension": 3, "beta_true": 2.5},
    "marginals": [
      {"name": "x", "family": "lognormal", "mean": 10.0, "cov": 0.5, "design_var": 0}
    ],
    "design": {"initial": [10.0], "lower": [5.0], "upper": [20.0]}
  })";
  const RunConfig a = RunConfig::parse(text);
  const std::string canonical = a.serialize();
  const RunConfig b = RunConfig::parse(canonical);
  CHECK(b.serialize() == canonical);
  CHECK(a.manifest_hash() == b.manifest_hash());
  CHECK(b.problem == "linear");
  CHECK(b.seed == 42);
  CHECK(b.beta_targets.size() == 2);
  CHECK(b.subset.samples_per_level == 2000);
  CHECK(b.subset.level_probability == 0.1);  // default preserved
  CHECK(b.linear_dimension == 3);
  REQUIRE(b.marginals.size() == 1);
  CHECK(b.marginals[0].std_dev_is_cov);
  CHECK(b.marginals[0].to_spec().std_dev == doctest::Approx(5.0));
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS((void)RunConfig::parse(R"({"problem": "linear", "seed": 1,
                                            "extra": true})"),
                  ConfigError);
  CHECK_THROWS_AS((void)RunConfig::parse(R"({"problem": "linear", "seed": 1,
                                            "subset": {"chains": 5}})"),
                  ConfigError);
  CHECK_THROWS_AS((void)RunConfig::parse(R"({"problem": "linear", "seed": 1,
                                            "optimizer": {"momentum": 0.9}})"),
                  ConfigError);
}

TEST_CASE("missing required fields are named") {
  try {
    (void)RunConfig::parse(R"({"seed": 1})");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("problem") != std::string::npos);
  }
  try {
    (void)RunConfig::parse(R"({"problem": "linear"})");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("seed") != std::string::npos);
  }
}

TEST_CASE("invalid values are config errors") {
  CHECK_THROWS_AS((void)RunConfig::parse(R"({"problem": "warp-drive", "seed": 1})"),
                  ConfigError);
  CHECK_THROWS_AS((void)RunConfig::parse(R"({"problem": "linear", "seed": "x"})"),
                  ConfigError);
  CHECK_THROWS_AS((void)RunConfig::parse("not json"), ConfigError);
}

TEST_CASE("manifest hash is stable and sensitive") {
  RunConfig a = RunConfig::parse(R"({"problem": "linear", "seed": 1})");
  RunConfig b = RunConfig::parse(R"({"problem": "linear", "seed": 1})");
  CHECK(a.manifest_hash() == b.manifest_hash());
  b.seed = 2;
  CHECK(a.manifest_hash() != b.manifest_hash());
}

TEST_CASE("problem assembly from a config") {
  RunConfig config = RunConfig::parse(R"({"problem": "rbdo-closed-form", "seed": 3,
                                          "beta_targets": [3.0]})");
  const BuiltProblem built = build_problem(config);
  CHECK(built.problem.limit_states.size() == 1);
  CHECK(built.problem.design.dim() == 2);
  CHECK(built.problem.spec.dim() == 2);

  RunConfig hull = RunConfig::parse(R"({"problem": "hull", "seed": 3})");
  const BuiltProblem built_hull = build_problem(hull);
  CHECK(built_hull.problem.limit_states.size() == 2);
  CHECK(built_hull.problem.design.dim() == 5);
  CHECK(built_hull.problem.deterministic_constraints.size() == 2);
  CHECK(built_hull.problem.spec.dim() == 13);
  // The two deterministic bounds are inactive at the nominal design.
  CHECK(built_hull.problem.deterministic_constraints[0](
            built_hull.problem.design.values) < 0.0);
  CHECK(built_hull.problem.deterministic_constraints[1](
            built_hull.problem.design.values) < 0.0);
}

TEST_CASE("reliability run writes deterministic artifacts") {
  RunConfig config = RunConfig::parse(
      R"({"problem": "linear", "seed": 5, "subset": {"samples_per_level": 2000}})");
  const auto dir1 = std::filesystem::temp_directory_path() / "relopt_run_a";
  const auto dir2 = std::filesystem::temp_directory_path() / "relopt_run_b";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
  run_reliability(config, dir1);
  RunConfig threaded = config;
  threaded.threads = 4;  // thread cap must not affect any byte
  run_reliability(threaded, dir2);

  for (const char* name : {"reliability.json", "levels.tsv"}) {
    std::ifstream f1(dir1 / name), f2(dir2 / name);
    REQUIRE(f1.good());
    REQUIRE(f2.good());
    std::string s1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
  }
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_SUITE_END();
