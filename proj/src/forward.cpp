#include "nlwave/forward.hpp"

#include "nlwave/errors.hpp"

#include <cmath>
#include <numbers>

namespace nlwave {

namespace {

void check_source(const Source& F, const SpatialGrid& grid, const TimeGrid& tg) {
  if (F.size() == 0) return;
  if (F.rows() != grid.omega_count() || F.cols() != tg.instants())
    throw ShapeError("source must have one Omega row per node and one column per instant");
}

Vec source_interval(const Source& F, int n) {
  return 0.5 * (F.col(n) + F.col(n + 1));
}

// Runs the stepper on Omega with node source F (possibly empty) and returns
// interior u and v, one column per instant.
std::pair<Mat, Mat> march(const MidpointStepper& stepper, const Source& F, const Vec& u0, const Vec& u1,
                          const TimeGrid& tg) {
  const Eigen::Index m = u0.size();
  Mat U(m, tg.instants()), V(m, tg.instants());
  Vec u = u0, v = u1;
  U.col(0) = u;
  V.col(0) = v;
  const Vec zero = Vec::Zero(m);
  for (int n = 0; n < tg.n_steps; ++n) {
    if (F.size() == 0)
      stepper.step(u, v, zero);
    else
      stepper.step(u, v, source_interval(F, n));
    U.col(n + 1) = u;
    V.col(n + 1) = v;
  }
  return {std::move(U), std::move(V)};
}

Vec time_samples(const TimeGrid& tg) {
  Vec t(tg.instants());
  for (int k = 0; k < tg.instants(); ++k) t[k] = tg.time(k);
  return t;
}

Mat restrict_columns(const SpatialGrid& grid, const Mat& full) {
  Mat out(grid.omega_count(), full.cols());
  for (int k = 0; k < grid.omega_count(); ++k) out.row(k) = full.row(grid.omega_nodes[k]);
  return out;
}

}  // namespace

TimeGrid TimeGrid::make(double T, int n_steps) {
  if (!(T > 0.0)) throw ConfigError("final time T must be positive");
  if (n_steps < 2) throw ConfigError("time grid needs at least 2 steps");
  return {T, n_steps};
}

Mat Trajectory::u_omega(const SpatialGrid& grid) const { return restrict_columns(grid, u); }
Mat Trajectory::v_omega(const SpatialGrid& grid) const { return restrict_columns(grid, v); }

MidpointStepper::MidpointStepper(const FractionalOperator& op, const Vec& gamma_omega, const Vec& q, double dt)
    : dt_(dt) {
  const Eigen::Index m = op.grid().omega_count();
  if (gamma_omega.size() != m || q.size() != m) throw ShapeError("stepper: gamma and q must be Omega vectors");
  K_ = op.interior_block();
  K_.diagonal() += q;
  Mat implicit = Mat::Identity(m, m) + 0.25 * dt * dt * K_;
  implicit.diagonal() += 0.5 * dt * gamma_omega;
  explicit_part_ = Mat::Identity(m, m) - 0.25 * dt * dt * K_;
  explicit_part_.diagonal() -= 0.5 * dt * gamma_omega;
  implicit_.compute(implicit);
  if (!(std::abs(implicit_.determinant()) > 0.0)) throw InternalError("midpoint matrix is singular");
}

void MidpointStepper::step(Vec& u, Vec& v, const Vec& f) const {
  const Vec rhs = explicit_part_ * v - dt_ * (K_ * u) + dt_ * f;
  Vec v_next = implicit_.solve(rhs);
  u += 0.5 * dt_ * (v_next + v);
  v = std::move(v_next);
}

Trajectory solve_homogeneous(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                             const Vec& u0, const Vec& u1, const TimeGrid& tg) {
  const SpatialGrid& grid = op.grid();
  if (u0.size() != grid.omega_count() || u1.size() != grid.omega_count())
    throw ShapeError("solve_homogeneous: initial data must be Omega vectors");
  check_source(F, grid, tg);
  MidpointStepper stepper(op, coeffs.gamma_omega(grid), coeffs.q, tg.dt());
  auto [U, V] = march(stepper, F, u0, u1, tg);

  Trajectory traj;
  traj.times = time_samples(tg);
  traj.u = Mat::Zero(grid.node_count(), tg.instants());
  traj.v = Mat::Zero(grid.node_count(), tg.instants());
  for (int k = 0; k < grid.omega_count(); ++k) {
    traj.u.row(grid.omega_nodes[k]) = U.row(k);
    traj.v.row(grid.omega_nodes[k]) = V.row(k);
  }
  traj.label = coeffs.label;
  return traj;
}

Trajectory solve_inhomogeneous(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                               const ExteriorData& exterior, const Vec& u0, const Vec& u1, const TimeGrid& tg) {
  const SpatialGrid& grid = op.grid();
  if (u0.size() != grid.node_count() || u1.size() != grid.node_count())
    throw ShapeError("solve_inhomogeneous: initial data must be full-grid vectors");
  check_source(F, grid, tg);
  validate_support(exterior, grid);

  const Vec phi0 = exterior.value(grid, 0.0);
  const Vec dphi0 = exterior.velocity(grid, 0.0);
  const double tol = 1e-12 * std::max({1.0, u0.cwiseAbs().maxCoeff(), u1.cwiseAbs().maxCoeff()});
  for (int i = 0; i < grid.node_count(); ++i) {
    if (grid.omega[i]) continue;
    if (std::abs(u0[i] - phi0[i]) > tol || std::abs(u1[i] - dphi0[i]) > tol)
      throw ConfigError("initial data are incompatible with the exterior data at t = 0");
  }

  const Source G = lifting_source(op, coeffs, F, exterior, tg);
  const Vec w0 = grid.restrict_to_omega(u0 - phi0);
  const Vec w1 = grid.restrict_to_omega(u1 - dphi0);
  MidpointStepper stepper(op, coeffs.gamma_omega(grid), coeffs.q, tg.dt());
  auto [U, V] = march(stepper, G, w0, w1, tg);
  Trajectory traj = assemble_lifted(grid, tg, exterior, U, V);
  traj.label = coeffs.label;
  return traj;
}

Source lifting_source(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                      const ExteriorData& exterior, const TimeGrid& tg) {
  const SpatialGrid& grid = op.grid();
  check_source(F, grid, tg);
  const Vec gamma_om = coeffs.gamma_omega(grid);
  Source G(grid.omega_count(), tg.instants());
  for (int k = 0; k < tg.instants(); ++k) {
    const double t = tg.time(k);
    const Vec phi = exterior.value(grid, t);
    const Vec phi_om = grid.restrict_to_omega(phi);
    const Vec dphi_om = grid.restrict_to_omega(exterior.velocity(grid, t));
    const Vec ddphi_om = grid.restrict_to_omega(exterior.acceleration(grid, t));
    Vec g = -(op.omega_rows() * phi) - ddphi_om - gamma_om.cwiseProduct(dphi_om) - coeffs.q.cwiseProduct(phi_om);
    if (F.size() != 0) g += F.col(k);
    G.col(k) = g;
  }
  return G;
}

Trajectory assemble_lifted(const SpatialGrid& grid, const TimeGrid& tg, const ExteriorData& exterior, const Mat& W,
                           const Mat& Wv) {
  Trajectory traj;
  traj.times = time_samples(tg);
  traj.u.resize(grid.node_count(), tg.instants());
  traj.v.resize(grid.node_count(), tg.instants());
  for (int k = 0; k < tg.instants(); ++k) {
    traj.u.col(k) = exterior.value(grid, tg.time(k));
    traj.v.col(k) = exterior.velocity(grid, tg.time(k));
  }
  for (int j = 0; j < grid.omega_count(); ++j) {
    traj.u.row(grid.omega_nodes[j]) += W.row(j);
    traj.v.row(grid.omega_nodes[j]) += Wv.row(j);
  }
  return traj;
}

Trajectory solve_inhomogeneous(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                               const ExteriorData& exterior, const TimeGrid& tg) {
  const Vec zero = Vec::Zero(op.grid().node_count());
  return solve_inhomogeneous(op, coeffs, F, exterior, zero, zero, tg);
}

Trajectory solve_backward(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                          const ExteriorData& exterior, const Vec& uT, const Vec& vT, const TimeGrid& tg) {
  // w(t) = v(T - t) solves the forward problem with +gamma and data (uT, -vT).
  const Source F_rev = F.size() == 0 ? Source() : Source(time_reverse(F));
  Trajectory fwd = solve_inhomogeneous(op, coeffs, F_rev, exterior.reversed(tg.T), uT, -vT, tg);
  Trajectory out;
  out.times = fwd.times;
  out.u = time_reverse(fwd.u);
  out.v = -time_reverse(fwd.v);
  out.label = coeffs.label + " (backward)";
  return out;
}

Vec discrete_energy(const FractionalOperator& op, const Trajectory& traj) {
  const SpatialGrid& grid = op.grid();
  const double h = grid.cell_volume();
  const Mat AU = op.matrix() * traj.u;
  Vec E(traj.u.cols());
  for (Eigen::Index k = 0; k < E.size(); ++k) {
    double kinetic = 0.0;
    for (int i : grid.omega_nodes) kinetic += traj.v(i, k) * traj.v(i, k);
    E[k] = h * (kinetic + traj.u.col(k).dot(AU.col(k)));
  }
  return E;
}

Vec energy_identity_residual(const FractionalOperator& op, const Trajectory& traj, const Coefficients& coeffs,
                             const Source& F, double dt, TimeRule rule) {
  const SpatialGrid& grid = op.grid();
  const double h = grid.cell_volume();
  const Vec E = discrete_energy(op, traj);
  const Mat U = traj.u_omega(grid);
  const Mat V = traj.v_omega(grid);
  const Vec gamma_om = coeffs.gamma_omega(grid);
  Mat integrand = gamma_om.asDiagonal() * V + coeffs.q.asDiagonal() * U;
  if (F.size() != 0) integrand -= F;

  const Eigen::Index N = U.cols() - 1;
  Vec increments(N);
  if (rule == TimeRule::scheme) {
    const Mat ib = interval_average(integrand);
    const Mat vb = interval_average(V);
    for (Eigen::Index n = 0; n < N; ++n) increments[n] = dt * h * ib.col(n).dot(vb.col(n));
  } else {
    for (Eigen::Index n = 0; n < N; ++n)
      increments[n] = 0.5 * dt * h * (integrand.col(n).dot(V.col(n)) + integrand.col(n + 1).dot(V.col(n + 1)));
  }

  Vec residual(N + 1);
  double acc = 0.0;
  residual[0] = 0.0;
  for (Eigen::Index k = 1; k <= N; ++k) {
    acc += increments[k - 1];
    residual[k] = std::abs(E[k] - E[0] + 2.0 * acc);
  }
  return residual;
}

double gronwall_ratio(const FractionalOperator& op, const Trajectory& traj, const Source& F, double dt) {
  const SpatialGrid& grid = op.grid();
  const double h = grid.cell_volume();
  const Mat V = traj.v_omega(grid);
  double sup = 0.0;
  for (Eigen::Index k = 0; k < traj.u.cols(); ++k) {
    const double kin = std::sqrt(h * V.col(k).squaredNorm());
    sup = std::max(sup, kin + op.hs_seminorm(traj.u.col(k)));
  }
  double data = std::sqrt(h * V.col(0).squaredNorm()) + op.hs_seminorm(traj.u.col(0));
  if (F.size() != 0) data += std::sqrt(time_pair(F, F, dt, h, TimeRule::trapezoid));
  if (data == 0.0) return sup == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return sup / data;
}

Source random_smooth_source(const SpatialGrid& grid, const TimeGrid& tg, std::mt19937_64& rng, int modes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = grid.spec.omega_halfwidth;
  Mat coef(modes, modes);
  for (int i = 0; i < modes; ++i)
    for (int j = 0; j < modes; ++j) coef(i, j) = normal(rng);
  Source G = Source::Zero(grid.omega_count(), tg.instants());
  for (int r = 0; r < grid.omega_count(); ++r) {
    const auto& x = grid.coords[grid.omega_nodes[r]];
    for (int i = 0; i < modes; ++i) {
      double sx = std::sin((i + 1) * std::numbers::pi * (x[0] + a) / (2.0 * a));
      if (grid.dimension() == 2) sx *= std::sin(std::numbers::pi * (x[1] + a) / (2.0 * a));
      for (int j = 0; j < modes; ++j)
        for (int k = 0; k < tg.instants(); ++k)
          G(r, k) += coef(i, j) * sx * std::cos(j * std::numbers::pi * tg.time(k) / tg.T);
    }
  }
  return G;
}

TranspositionReport verify_transposition(const FractionalOperator& op, const Coefficients& coeffs, const Vec& u0,
                                         const Vec& u1, const Source& F, const TimeGrid& tg, int n_probes,
                                         std::mt19937_64& rng, const TranspositionOptions& options) {
  const SpatialGrid& grid = op.grid();
  const double h = grid.cell_volume();
  const double dt = tg.dt();
  const Trajectory fwd = solve_homogeneous(op, coeffs, F, u0, u1, tg);
  const Mat U = fwd.u_omega(grid);
  const Vec gamma_om = coeffs.gamma_omega(grid);
  const Vec zero_full = Vec::Zero(grid.node_count());
  const Source F_eff = F.size() == 0 ? Source::Zero(grid.omega_count(), tg.instants()) : F;

  TranspositionReport report;
  for (int p = 0; p < n_probes; ++p) {
    const Source G = random_smooth_source(grid, tg, rng, options.modes);
    const Trajectory adj = solve_backward(op, coeffs, G, ExteriorData{}, zero_full, zero_full, tg);
    const Mat P = adj.u_omega(grid);
    const Vec p0 = P.col(0);
    const Vec w0 = grid.restrict_to_omega(adj.v.col(0));

    const double t_gu = time_pair(G, U, dt, h, options.rule);
    const double t_fv = time_pair(F_eff, P, dt, h, options.rule);
    const double t_u1 = h * u1.dot(p0);
    const double t_u0 = h * u0.dot(w0);
    const double t_gamma = options.include_gamma_term ? h * (gamma_om.cwiseProduct(u0)).dot(p0) : 0.0;

    const double defect = std::abs(t_gu - t_fv - t_u1 + t_u0 - t_gamma);
    const double scale =
        std::max({std::abs(t_gu), std::abs(t_fv), std::abs(t_u1), std::abs(t_u0), std::abs(h * gamma_om.cwiseProduct(u0).dot(p0)), 1e-300});
    report.defects.push_back(defect);
    report.scales.push_back(scale);
    report.max_defect = std::max(report.max_defect, defect);
    report.max_relative = std::max(report.max_relative, defect / scale);
  }
  return report;
}

}  // namespace nlwave
