#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlwave/coeffs.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/exterior.hpp"
#include "nlwave/time_pairing.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace nlwave;

namespace {

SpatialGrid grid1d(int points = 64) {
  GridSpec gs;
  gs.points_per_axis = points;
  return make_grid(gs);
}

const double inf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("exponent windows by regime") {
  // n = 1, s = 1/2 is the borderline case 2s = n: p must exceed 2, r is free.
  CHECK(validate_exponents(1, 0.5, 2.5, 3.0).pass());
  CHECK_FALSE(validate_exponents(1, 0.5, 2.0, 1.0).checks[0].pass);
  // 2s < n: p >= n/s and r <= 2s/(n-2s).
  CHECK(validate_exponents(1, 0.25, 4.0, 1.0).pass());
  CHECK_FALSE(validate_exponents(1, 0.25, 3.9, 1.0).checks[0].pass);
  CHECK_FALSE(validate_exponents(1, 0.25, inf, 1.01).checks[1].pass);
  // 2s > n: p >= 2.
  CHECK(validate_exponents(1, 0.75, 2.0, 5.0).pass());
  CHECK_FALSE(validate_exponents(2, 0.5, inf, -0.5).checks[1].pass);
  CHECK(validate_exponents(2, 0.5, 4.0, 1.0).pass());
  CHECK_FALSE(validate_exponents(2, 0.5, 4.0, 1.1).pass());
  CHECK(validate_exponents(1, 0.25, 4.0, 1.5).summary().find("[fail] r window") != std::string::npos);
}

TEST_CASE("coefficient validation") {
  const SpatialGrid g = grid1d();
  Coefficients c = Coefficients::zero(g);
  CHECK_NOTHROW(validate_coefficients(c, g, 0.5));
  c.alpha = 0.4;
  CHECK_THROWS_AS(validate_coefficients(c, g, 0.5), DomainError);
  c.alpha = 1.0;
  c.q = Vec::Zero(3);
  CHECK_THROWS_AS(validate_coefficients(c, g, 0.5), ShapeError);
  c = Coefficients::zero(g);
  c.p_exponent = 2.0;
  CHECK_THROWS_AS(validate_coefficients(c, g, 0.5), DomainError);
  c.p_exponent = inf;
  c.q[0] = std::nan("");
  CHECK_THROWS_AS(validate_coefficients(c, g, 0.5), DomainError);
}

TEST_CASE("nonlinearity and its antiderivative") {
  Nonlinearity f{Vec::Constant(5, 2.0), 1.5};
  const Vec u = Vec::LinSpaced(5, -1.0, 1.5);
  const Vec fu = eval_nonlinearity(f, u);
  for (int i = 0; i < 5; ++i) CHECK(fu[i] == doctest::Approx(2.0 * std::pow(std::abs(u[i]), 1.5) * u[i]));
  // Central difference of F reproduces f.
  const double d = 1e-6;
  const Vec dF = (eval_antiderivative(f, u.array() + d) - eval_antiderivative(f, u.array() - d)) / (2 * d);
  CHECK((dF - fu).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(eval_nonlinearity(f, Vec::Zero(3)), ShapeError);
  f.qf[2] = -1.0;
  CHECK_THROWS_AS(validate_nonlinearity(f, 1, 0.5), DomainError);
  Nonlinearity g{Vec::Ones(5), 3.0};
  CHECK_THROWS_AS(validate_nonlinearity(g, 1, 0.25), DomainError);
  CHECK_NOTHROW(validate_nonlinearity(g, 1, 0.5));
}

TEST_CASE("field presets and CSV loading") {
  const SpatialGrid g = grid1d(65);
  const int mid = 32;  // x = 0
  FieldPreset p{FieldPreset::Kind::gaussian, 0.1, 2.0, 0.0, 0.3};
  Vec v = evaluate_preset(p, g);
  CHECK(v[mid] == doctest::Approx(2.1));
  CHECK(v[0] == doctest::Approx(0.1 + 2.0 * std::exp(-0.5 * 4.0 / 0.09)));
  p = {FieldPreset::Kind::step, 0.0, 1.0, 0.0, 0.25};
  v = evaluate_preset(p, g);
  CHECK(v[mid] == doctest::Approx(0.5));
  CHECK(v[0] + v[64] == doctest::Approx(1.0));
  CHECK(parse_preset_kind("constant") == FieldPreset::Kind::constant);
  CHECK_THROWS_AS(parse_preset_kind("spline"), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "nlwave_field_test.csv";
  {
    std::ofstream out(path);
    out << "node,value\n3,1.5\n# comment\n10,-2\n";
  }
  v = load_field_csv(path.string(), g);
  CHECK(v[3] == 1.5);
  CHECK(v[10] == -2.0);
  CHECK(v.cwiseAbs().sum() == 3.5);
  {
    std::ofstream out(path);
    out << "0,1\n99,2\n";
  }
  CHECK_THROWS_WITH_AS(load_field_csv(path.string(), g), doctest::Contains(":2:"), ConfigError);
  CHECK_THROWS_AS(load_field_csv("/nonexistent/field.csv", g), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("bump derivatives match finite differences") {
  const TimeBump b{0.7, 0.5};
  const double d = 1e-5;
  for (double t : {0.3, 0.6, 0.9, 1.1}) {
    CHECK(b.first(t) == doctest::Approx((b.value(t + d) - b.value(t - d)) / (2 * d)).epsilon(1e-6));
    CHECK(b.second(t) == doctest::Approx((b.first(t + d) - b.first(t - d)) / (2 * d)).epsilon(1e-5));
  }
  CHECK(b.value(0.1) == 0.0);
  CHECK(b.reversed(2.0).center == doctest::Approx(1.3));
}

TEST_CASE("exterior data support and compatibility") {
  const SpatialGrid g = grid1d();
  const BumpElement good{"W1", SpaceBump{{-1.5, 0.0}, {0.3, 1.0}}, TimeBump{1.0, 1.0}};
  const ExteriorData data = ExteriorData::single(good, 2.0);
  CHECK_NOTHROW(validate_support(data, g));
  CHECK_NOTHROW(validate_compatibility(data));
  const Vec v = data.value(g, 1.0);
  for (int i = 0; i < g.node_count(); ++i)
    if (v[i] != 0.0) CHECK(g.window("W1")[i]);

  BumpElement leaky = good;
  leaky.space.halfwidth[0] = 0.6;
  CHECK_THROWS_AS(validate_support(ExteriorData::single(leaky), g), ConfigError);
  BumpElement early = good;
  early.time = {0.2, 0.5};
  CHECK_THROWS_AS(validate_compatibility(ExteriorData::single(early)), ConfigError);

  const ExteriorData sum = data + data.scaled(-0.5);
  CHECK((sum.value(g, 0.8) - 0.5 * data.value(g, 0.8)).norm() < 1e-14);
  CHECK((data.reversed(2.0).value(g, 0.5) - data.value(g, 1.5)).norm() < 1e-14);
}

TEST_CASE("tensor family size and windows") {
  const auto fam = tensor_family("W2", {SpaceBump{{1.5, 0.0}, {0.3, 1.0}}, SpaceBump{{1.4, 0.0}, {0.1, 1.0}}}, 5, 2.0);
  CHECK(fam.size() == 10);
  for (const auto& e : fam) {
    CHECK(e.window == "W2");
    CHECK(e.time.value(0.0) == 0.0);
    CHECK(e.time.first(0.0) == 0.0);
  }
}

TEST_CASE("time pairings") {
  Mat a(2, 5), b(2, 5);
  a << 1, 2, 3, 4, 5, 0, 1, 0, 1, 0;
  b << 1, 1, 1, 1, 1, 2, 2, 2, 2, 2;
  const double dt = 0.5, h = 0.1;
  // Trapezoid by hand: row sums weighted (1/2, 1, 1, 1, 1/2).
  const double trap = dt * h * ((0.5 + 2 + 3 + 4 + 2.5) + 2 * (0 + 1 + 0 + 1 + 0));
  CHECK(time_pair(a, b, dt, h, TimeRule::trapezoid) == doctest::Approx(trap));
  // Scheme rule with b constant in time equals trapezoid.
  CHECK(time_pair(a, b, dt, h, TimeRule::scheme) == doctest::Approx(trap));
  CHECK(interval_average(a).cols() == 4);
  CHECK(interval_difference(a, dt)(0, 0) == doctest::Approx(2.0));
  CHECK(time_reverse(a)(0, 0) == 5.0);
  CHECK(parse_time_rule("trapezoid") == TimeRule::trapezoid);
  CHECK(to_string(TimeRule::scheme) == "scheme");
  CHECK_THROWS_AS(parse_time_rule("simpson"), ConfigError);
}
