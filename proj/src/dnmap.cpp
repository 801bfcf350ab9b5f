#include "nlwave/dnmap.hpp"

#include "nlwave/errors.hpp"
#include "nlwave/io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace nlwave {

namespace {

std::string grid_description(const SpatialGrid& g) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "n=%d points=%d R=%.6g a=%.6g", g.dimension(), g.spec.points_per_axis,
                g.spec.box_halfwidth, g.spec.omega_halfwidth);
  return buf;
}

// Pairing of A u against precomputed test samples under the chosen rule.
double pair_full(const Mat& Au, const Mat& test, const TimeGrid& tg, double h, TimeRule rule) {
  return time_pair(Au, test, tg.dt(), h, rule);
}

}  // namespace

Mat sample_exterior(const SpatialGrid& grid, const ExteriorData& data, const TimeGrid& tg) {
  Mat out(grid.node_count(), tg.instants());
  for (int k = 0; k < tg.instants(); ++k) out.col(k) = data.value(grid, tg.time(k));
  return out;
}

Mat centered_time_derivative(const Mat& a, double dt) {
  const Eigen::Index n = a.cols();
  Mat d(a.rows(), n);
  if (n < 3) throw ShapeError("centered differences need at least 3 instants");
  d.col(0) = (-3.0 * a.col(0) + 4.0 * a.col(1) - a.col(2)) / (2.0 * dt);
  for (Eigen::Index k = 1; k + 1 < n; ++k) d.col(k) = (a.col(k + 1) - a.col(k - 1)) / (2.0 * dt);
  d.col(n - 1) = (3.0 * a.col(n - 1) - 4.0 * a.col(n - 2) + a.col(n - 3)) / (2.0 * dt);
  return d;
}

void DNMatrix::write(const std::string& csv_path) const {
  write_matrix_csv(csv_path, values);
  nlohmann::ordered_json meta;
  meta["rows"] = values.rows();
  meta["cols"] = values.cols();
  meta["coefficients_hash"] = coefficients_hash;
  meta["grid"] = grid;
  meta["dt"] = dt;
  meta["n_steps"] = n_steps;
  meta["time_rule"] = time_rule;
  meta["reversal"] = reversal;
  meta["row_basis"] = row_basis;
  meta["col_basis"] = col_basis;
  std::ofstream out(csv_path + ".json");
  if (!out) throw ConfigError("cannot write " + csv_path + ".json");
  out << meta.dump(2) << "\n";
}

double dn_pairing(const FractionalOperator& op, const Coefficients& coeffs, const ExteriorData& phi,
                  const ExteriorData& psi, const TimeGrid& tg, TimeRule rule) {
  const SpatialGrid& grid = op.grid();
  validate_support(psi, grid);
  if (phi.empty()) return 0.0;
  const Trajectory u = solve_inhomogeneous(op, coeffs, Source(), phi, tg);
  return pair_full(op.matrix() * u.u, sample_exterior(grid, psi, tg), tg, grid.cell_volume(), rule);
}

DNMatrix dn_matrix(const FractionalOperator& op, const Coefficients& coeffs, const std::vector<BumpElement>& basis1,
                   const std::vector<BumpElement>& basis2, const TimeGrid& tg, Reversal reversal, TimeRule rule) {
  const SpatialGrid& grid = op.grid();
  DNMatrix out;
  out.values = Mat::Zero(basis2.size(), basis1.size());
  out.coefficients_hash = nlwave::coefficients_hash(coeffs);
  out.grid = grid_description(grid);
  out.dt = tg.dt();
  out.n_steps = tg.n_steps;
  out.time_rule = to_string(rule);
  out.reversal = reversal == Reversal::star ? "star" : "none";
  for (const auto& e : basis1) out.col_basis.push_back(e.describe());
  for (const auto& e : basis2) out.row_basis.push_back(e.describe());
  if (basis1.empty() || basis2.empty()) return out;

  std::vector<Mat> tests;
  tests.reserve(basis2.size());
  for (const auto& e : basis2) {
    ExteriorData psi = ExteriorData::single(e);
    validate_support(psi, grid);
    if (reversal == Reversal::star) psi = psi.reversed(tg.T);
    tests.push_back(sample_exterior(grid, psi, tg));
  }
  const double h = grid.cell_volume();
  for (std::size_t i = 0; i < basis1.size(); ++i) {
    const Trajectory u = solve_inhomogeneous(op, coeffs, Source(), ExteriorData::single(basis1[i]), tg);
    const Mat Au = op.matrix() * u.u;
    for (std::size_t j = 0; j < basis2.size(); ++j) out.values(j, i) = pair_full(Au, tests[j], tg, h, rule);
  }
  return out;
}

AdjointnessDefect check_self_adjointness(const FractionalOperator& op, const Coefficients& coeffs,
                                         const std::vector<BumpElement>& basis1,
                                         const std::vector<BumpElement>& basis2, const TimeGrid& tg,
                                         Reversal reversal, TimeRule rule) {
  const DNMatrix d12 = dn_matrix(op, coeffs, basis1, basis2, tg, reversal, rule);
  const DNMatrix d21 = dn_matrix(op, coeffs, basis2, basis1, tg, reversal, rule);
  AdjointnessDefect out;
  for (Eigen::Index j = 0; j < d12.values.rows(); ++j)
    for (Eigen::Index i = 0; i < d12.values.cols(); ++i) {
      out.defect = std::max(out.defect, std::abs(d12.values(j, i) - d21.values(i, j)));
      out.scale = std::max({out.scale, std::abs(d12.values(j, i)), std::abs(d21.values(i, j))});
    }
  return out;
}

IdentityCheck check_integral_identity(const FractionalOperator& op, const Coefficients& c1, const Coefficients& c2,
                                      const ExteriorData& phi1, const ExteriorData& phi2, const TimeGrid& tg,
                                      TimeRule rule) {
  const SpatialGrid& grid = op.grid();
  const double h = grid.cell_volume();
  const ExteriorData phi2_star = phi2.reversed(tg.T);

  IdentityCheck out;
  out.lhs = dn_pairing(op, c1, phi1, phi2_star, tg, rule) - dn_pairing(op, c2, phi1, phi2_star, tg, rule);

  const Mat w1 = solve_inhomogeneous(op, c1, Source(), phi1, tg).u_omega(grid);
  const Mat w2_star = time_reverse(solve_inhomogeneous(op, c2, Source(), phi2, tg).u_omega(grid));
  const Vec dgamma = c1.gamma_omega(grid) - c2.gamma_omega(grid);
  const Vec dq = c1.q - c2.q;

  if (rule == TimeRule::scheme) {
    const Mat lhs_factor =
        dgamma.asDiagonal() * interval_difference(w1, tg.dt()) + dq.asDiagonal() * interval_average(w1);
    out.rhs = interval_pair(lhs_factor, interval_average(w2_star), tg.dt(), h);
  } else {
    const Mat lhs_factor = dgamma.asDiagonal() * centered_time_derivative(w1, tg.dt()) + dq.asDiagonal() * w1;
    out.rhs = time_pair(lhs_factor, w2_star, tg.dt(), h, TimeRule::trapezoid);
  }
  out.defect = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace nlwave
