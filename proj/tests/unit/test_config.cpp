#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlwave/config.hpp"
#include "nlwave/errors.hpp"

#include <filesystem>

using namespace nlwave;

TEST_CASE("kinds round-trip through their names") {
  for (const std::string& name : kind_names()) CHECK(to_string(parse_kind(name)) == name);
  CHECK(kind_names().size() == 7);
  CHECK_THROWS_WITH_AS(parse_kind("inverse"), doctest::Contains("invert-linear"), ConfigError);
}

TEST_CASE("defaults resolve every schema field") {
  const ExperimentConfig cfg = ExperimentConfig::defaults(ExperimentKind::identities);
  CHECK(cfg.kind() == ExperimentKind::identities);
  CHECK(cfg.seed() == 0);
  CHECK(cfg.integer("grid", "points") == 64);
  CHECK(cfg.number("operator", "s") == 0.5);
  CHECK(cfg.text("time", "rule") == "scheme");
  CHECK(cfg.flag("invert", "ablations"));
  CHECK(cfg.list("runge", "sizes") == std::vector<double>{4, 8, 16, 32});
  CHECK(cfg.list("invert", "ladder").empty());
  const auto j = cfg.resolved();
  CHECK(j["tolerances"]["transposition"] == 1e-8);
  CHECK(j["experiment"]["seed"] == 0);
  CHECK_THROWS_AS(cfg.text("grid", "colour"), ConfigError);
}

TEST_CASE("values override defaults and --seed style overrides are validated") {
  ExperimentConfig cfg = ExperimentConfig::parse(
      "; comment\n[experiment]\nkind = forward\nseed = 42\n\n[grid]\npoints = 33\n[gamma]\npreset = step\n"
      "amplitude = 0.3\n");
  CHECK(cfg.seed() == 42);
  CHECK(cfg.integer("grid", "points") == 33);
  CHECK(cfg.text("gamma", "preset") == "step");
  CHECK(cfg.has("gamma", "file"));
  CHECK_FALSE(cfg.has("delta_q", "base"));
  cfg.set("experiment", "seed", "7");
  CHECK(cfg.seed() == 7);
  CHECK_THROWS_AS(cfg.set("experiment", "seed", "seven"), ConfigError);
  CHECK_THROWS_AS(cfg.set("grid", "colour", "red"), ConfigError);
}

TEST_CASE("errors name origin, line and field") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = forward\n[grid]\npoints = many\n", "a.ini"),
                       "a.ini:4: [grid] points: expected an integer", ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = forward\n[gird]\npoints = 3\n", "b.ini"),
                       "b.ini:3: [gird]: unknown section", ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = forward\n\n[time]\nsteps = 10\ndt = 0.1\n", "c.ini"),
                       "c.ini:6: [time] dt: unknown field", ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nseed = 1\n", "d.ini"),
                       "d.ini: [experiment] kind: missing required field", ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = warp\n", "e.ini"),
                       doctest::Contains("e.ini:2: [experiment] kind"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = scan\n", "f.ini"),
                       doctest::Contains("[scan] epsilons: missing required field for kind scan"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = forward\n[q]\nfile = /no/such.csv\n", "g.ini"),
                       doctest::Contains("g.ini:4: [q] file: file does not exist"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = forward\n[invert]\nablations = yes\n"),
                       doctest::Contains("expected true or false"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[experiment]\nkind = forward\n[runge]\nsizes = 4,x\n"),
                       doctest::Contains("comma-separated"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[experiment]\nkind = forward\n[grid]\npoints = 4\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[experiment\nkind = forward\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load("/no/such/config.ini"), ConfigError);
}

TEST_CASE("required fields per kind") {
  CHECK_THROWS_AS(ExperimentConfig::parse("[experiment]\nkind = invert-linear\n"), ConfigError);
  CHECK_NOTHROW(ExperimentConfig::parse("[experiment]\nkind = invert-linear\n[invert]\nfield = damping\n"));
  CHECK_NOTHROW(ExperimentConfig::defaults(ExperimentKind::invert_semilinear));
}

TEST_CASE("shipped example configs parse") {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(NLWAVE_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    CHECK_NOTHROW(ExperimentConfig::load(entry.path().string()));
    ++count;
  }
  CHECK(count >= 7);
}
