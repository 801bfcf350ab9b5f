#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlwave/dnmap.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace nlwave;

namespace {

SpatialGrid grid1d(int points = 48) {
  GridSpec gs;
  gs.points_per_axis = points;
  return make_grid(gs);
}

BumpElement w1(double c, double w, double tc, double tw) { return {"W1", SpaceBump{{c, 0.0}, {w, 1.0}}, TimeBump{tc, tw}}; }
BumpElement w2(double c, double w, double tc, double tw) { return {"W2", SpaceBump{{c, 0.0}, {w, 1.0}}, TimeBump{tc, tw}}; }

Coefficients background(const SpatialGrid& g) {
  Coefficients c = Coefficients::zero(g);
  for (int i = 0; i < g.node_count(); ++i) c.gamma[i] = 0.3 + 0.1 * std::cos(g.coords[i][0]);
  c.q.setConstant(0.2);
  return c;
}

}  // namespace

TEST_CASE("DN matrix is self-adjoint under time reversal only") {
  const SpatialGrid g = grid1d();
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  const TimeGrid tg = TimeGrid::make(2.0, 100);
  const std::vector<BumpElement> b1{w1(-1.5, 0.25, 0.6, 0.5), w1(-1.4, 0.15, 0.9, 0.5)};
  const std::vector<BumpElement> b2{w2(1.5, 0.25, 0.7, 0.6), w2(1.6, 0.15, 1.0, 0.6)};
  const Coefficients c = background(g);
  for (TimeRule rule : {TimeRule::scheme, TimeRule::trapezoid}) {
    const AdjointnessDefect star = check_self_adjointness(op, c, b1, b2, tg, Reversal::star, rule);
    CHECK(star.scale > 0.0);
    CHECK(star.defect / star.scale < 1e-10);
    const AdjointnessDefect none = check_self_adjointness(op, c, b1, b2, tg, Reversal::none, rule);
    CHECK(none.defect / none.scale > 1e-3);
  }
}

TEST_CASE("matrix entries agree with the direct pairing") {
  const SpatialGrid g = grid1d();
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  const TimeGrid tg = TimeGrid::make(2.0, 80);
  const Coefficients c = background(g);
  const std::vector<BumpElement> b1{w1(-1.5, 0.25, 1.0, 1.0)};
  const std::vector<BumpElement> b2{w2(1.5, 0.25, 1.1, 0.8), w2(1.4, 0.1, 0.9, 0.8)};
  const DNMatrix D = dn_matrix(op, c, b1, b2, tg);
  CHECK(D.values.rows() == 2);
  CHECK(D.values.cols() == 1);
  for (int j = 0; j < 2; ++j) {
    const double direct =
        dn_pairing(op, c, ExteriorData::single(b1[0]), ExteriorData::single(b2[j]).reversed(tg.T), tg);
    CHECK(D.values(j, 0) == doctest::Approx(direct).epsilon(1e-13));
  }
  // Linearity in the datum.
  const double base = dn_pairing(op, c, ExteriorData::single(b1[0]), ExteriorData::single(b2[0]), tg);
  CHECK(dn_pairing(op, c, ExteriorData::single(b1[0], -3.0), ExteriorData::single(b2[0]), tg) ==
        doctest::Approx(-3.0 * base));
  CHECK(D.reversal == "star");
  CHECK(D.coefficients_hash == coefficients_hash(c));

  const auto dir = std::filesystem::temp_directory_path() / "nlwave_dn_test";
  std::filesystem::create_directories(dir);
  D.write((dir / "dn.csv").string());
  CHECK(std::filesystem::exists(dir / "dn.csv"));
  CHECK(std::filesystem::exists(dir / "dn.csv.json"));
  const Mat back = read_matrix_csv((dir / "dn.csv").string());
  CHECK((back - D.values).norm() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("integral identity: exact for the scheme rule") {
  const SpatialGrid g = grid1d();
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  const TimeGrid tg = TimeGrid::make(2.0, 100);
  const Coefficients c2 = background(g);
  const ExteriorData phi1 = ExteriorData::single(w1(-1.5, 0.25, 1.0, 1.0));
  const ExteriorData phi2 = ExteriorData::single(w2(1.5, 0.25, 1.0, 1.0));

  Coefficients c1 = c2;
  for (int j = 0; j < g.omega_count(); ++j) c1.q[j] += std::exp(-std::pow(g.coords[g.omega_nodes[j]][0] / 0.3, 2));
  IdentityCheck r = check_integral_identity(op, c1, c2, phi1, phi2, tg);
  CHECK(std::abs(r.lhs) > 1e-8);
  CHECK(r.defect < 1e-10 * std::abs(r.lhs));

  c1 = c2;
  for (int i = 0; i < g.node_count(); ++i) c1.gamma[i] += 0.4 * (g.coords[i][0] > 0 ? 1.0 : 0.0);
  r = check_integral_identity(op, c1, c2, phi1, phi2, tg);
  CHECK(std::abs(r.lhs) > 1e-8);
  CHECK(r.defect < 1e-10 * std::abs(r.lhs));

  // Identical coefficients: both sides vanish exactly.
  r = check_integral_identity(op, c2, c2, phi1, phi2, tg);
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == 0.0);
}

TEST_CASE("integral identity under the trapezoid rule is second order for damping") {
  const SpatialGrid g = grid1d(40);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  const Coefficients c2 = background(g);
  Coefficients c1 = c2;
  for (int i = 0; i < g.node_count(); ++i) c1.gamma[i] += 0.4 * std::exp(-g.coords[i][0] * g.coords[i][0]);
  const ExteriorData phi1 = ExteriorData::single(w1(-1.5, 0.25, 1.0, 1.0));
  const ExteriorData phi2 = ExteriorData::single(w2(1.5, 0.25, 1.0, 1.0));
  std::vector<double> defect;
  for (int steps : {50, 100, 200})
    defect.push_back(check_integral_identity(op, c1, c2, phi1, phi2, TimeGrid::make(2.0, steps), TimeRule::trapezoid).defect);
  CHECK(defect[0] / defect[1] == doctest::Approx(4.0).epsilon(0.2));
  CHECK(defect[1] / defect[2] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("centered time derivative") {
  Mat a(1, 5);
  a << 0, 1, 4, 9, 16;  // t^2 at dt = 1
  const Mat d = centered_time_derivative(a, 1.0);
  CHECK(d(0, 2) == doctest::Approx(4.0));
  CHECK(d(0, 0) == doctest::Approx(0.0));
  CHECK(d(0, 4) == doctest::Approx(8.0));
  CHECK_THROWS_AS(centered_time_derivative(Mat::Zero(1, 2), 1.0), ShapeError);
}
