#include "nlwave/invert.hpp"

#include "nlwave/errors.hpp"
#include "nlwave/io.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <iostream>
#include <numeric>

namespace nlwave {

namespace {

// Quintic smoothstep on [a, b]: 0 before a, 1 after b, C2 at both ends.
double smoothstep(double t, double a, double b) {
  const double z = std::clamp((t - a) / (b - a), 0.0, 1.0);
  return z * z * z * (10.0 - 15.0 * z + 6.0 * z * z);
}

double bump(double z) {
  const double w = 1.0 - z * z;
  return w > 0.0 ? w * w * w : 0.0;
}

// Signed Menger curvature of three points on the L-curve.
double menger(const std::array<double, 2>& a, const std::array<double, 2>& b, const std::array<double, 2>& c) {
  const double area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  const double d = std::hypot(b[0] - a[0], b[1] - a[1]) * std::hypot(c[0] - b[0], c[1] - b[1]) *
                   std::hypot(c[0] - a[0], c[1] - a[1]);
  return d > 0.0 ? 2.0 * area / d : 0.0;
}

Mat penalty_matrix(int cells, double identity_weight) {
  Mat L = Mat::Zero(2 * cells - 1, cells);
  for (int k = 0; k + 1 < cells; ++k) {
    L(k, k) = -1.0;
    L(k, k + 1) = 1.0;
  }
  L.bottomRows(cells) = identity_weight * Mat::Identity(cells, cells);
  return L;
}

// R[(j, i), k] = dt h sum_n sum_x chi_k(x) a_i(x, n) b_j(x, n).
Mat sensitivity_rows(const std::vector<Mat>& a, const std::vector<Mat>& b, const RecoveryMesh& mesh, double dt,
                     double h) {
  const Eigen::Index n1 = static_cast<Eigen::Index>(a.size());
  const Eigen::Index n2 = static_cast<Eigen::Index>(b.size());
  const Eigen::Index nx = mesh.indicator.cols();
  const Eigen::Index nt = a.front().cols();
  Mat R = Mat::Zero(n1 * n2, mesh.cells());
  Mat Ax(n1, nt), Bx(n2, nt);
  for (Eigen::Index x = 0; x < nx; ++x) {
    for (Eigen::Index i = 0; i < n1; ++i) Ax.row(i) = a[i].row(x);
    for (Eigen::Index j = 0; j < n2; ++j) Bx.row(j) = b[j].row(x);
    const Mat P = dt * h * (Bx * Ax.transpose());  // n2 x n1
    for (int k = 0; k < mesh.cells(); ++k) {
      const double w = mesh.indicator(k, x);
      if (w == 0.0) continue;
      for (Eigen::Index j = 0; j < n2; ++j)
        for (Eigen::Index i = 0; i < n1; ++i) R(j * n1 + i, k) += w * P(j, i);
    }
  }
  return R;
}

Vec flatten_rows(const Mat& D) {
  Vec out(D.size());
  for (Eigen::Index j = 0; j < D.rows(); ++j)
    for (Eigen::Index i = 0; i < D.cols(); ++i) out[j * D.cols() + i] = D(j, i);
  return out;
}

Coefficients with_correction(const Coefficients& reference, const SpatialGrid& grid,
                             const std::vector<LinearField>& fields, const RecoveryMesh& mesh, const Vec& x) {
  Coefficients c = reference;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const Vec correction = mesh.expand(x.segment(f * mesh.cells(), mesh.cells()));
    if (fields[f] == LinearField::potential)
      c.q += correction;
    else
      c.gamma += grid.extend_from_omega(correction);
  }
  c.label = "model";
  return c;
}

Mat separable(const Vec& space, const Vec& time) { return space * time.transpose(); }

}  // namespace

DNMatrix SyntheticTwin::measure(const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2,
                                const TimeGrid& tg) const {
  DNMatrix d = dn_matrix(op_, hidden_, basis1, basis2, tg, Reversal::star, TimeRule::scheme);
  d.coefficients_hash = "hidden";
  return d;
}

RecoveryMesh RecoveryMesh::make(const SpatialGrid& grid, int cells) {
  if (cells < 2) throw ConfigError("recovery mesh needs at least 2 cells");
  if (grid.dimension() != 1) throw ConfigError("recovery mesh is implemented for 1D grids only");
  RecoveryMesh mesh;
  const double a = grid.spec.omega_halfwidth;
  mesh.edges = Vec::LinSpaced(cells + 1, -a, a);
  mesh.indicator = Mat::Zero(cells, grid.omega_count());
  for (int j = 0; j < grid.omega_count(); ++j) {
    const double x = grid.coords[grid.omega_nodes[j]][0];
    int k = static_cast<int>(std::floor((x + a) / (2.0 * a) * cells));
    mesh.indicator(std::clamp(k, 0, cells - 1), j) = 1.0;
  }
  for (int k = 0; k < cells; ++k)
    if (mesh.indicator.row(k).sum() == 0.0)
      throw ConfigError("recovery mesh cell " + std::to_string(k) + " contains no grid node; use fewer cells");
  return mesh;
}

Vec RecoveryMesh::average(const Vec& omega_field) const {
  return (indicator * omega_field).cwiseQuotient(indicator.rowwise().sum());
}

Vec RecoveryMesh::expand(const Vec& cell_values) const { return indicator.transpose() * cell_values; }

std::vector<double> default_ladder() {
  std::vector<double> out;
  for (int i = 0; i < 8; ++i) out.push_back(std::pow(10.0, -3.0 - 0.5 * i));
  return out;
}

double relative_cell_error(const RecoveryMesh& mesh, const Vec& recovered_cells, const Vec& truth_correction) {
  const Vec truth = mesh.average(truth_correction);
  const double diff = (recovered_cells - truth).norm();
  const double scale = truth.norm();
  return scale > 0.0 ? diff / scale : diff;
}

std::vector<ProbeRecord> probe_inventory(const RungeBasis& w1, const RungeBasis& w2, const RecoveryMesh& mesh,
                                         LinearField field) {
  const SpatialGrid& grid = w1.op().grid();
  const TimeGrid& tg = w1.time_grid();
  const double a = grid.spec.omega_halfwidth;
  Vec chi(grid.omega_count());
  for (int j = 0; j < grid.omega_count(); ++j) {
    const double x = std::abs(grid.coords[grid.omega_nodes[j]][0]);
    chi[j] = 1.0 - smoothstep(x, 0.6 * a, 0.9 * a);
  }
  Vec sigma(tg.instants());
  if (field == LinearField::potential) {
    for (int k = 0; k < tg.instants(); ++k) {
      const double t = tg.time(k);
      sigma[k] = smoothstep(t, 0.0, 0.3 * tg.T) * (1.0 - smoothstep(t, 0.7 * tg.T, tg.T));
    }
  } else {
    // Phi1 = int_0^t eta with eta a time bump; cumulative trapezoid.
    sigma[0] = 0.0;
    const double c = 0.5 * tg.T, w = 0.4 * tg.T;
    for (int k = 1; k < tg.instants(); ++k)
      sigma[k] = sigma[k - 1] + 0.5 * tg.dt() * (bump((tg.time(k - 1) - c) / w) + bump((tg.time(k) - c) / w));
  }

  std::vector<ProbeRecord> out;
  const ControlFit f1 = fit_control(w1, separable(chi, sigma));
  out.push_back({"phi1", field == LinearField::potential ? "cutoff x plateau" : "cutoff x integrated bump",
                 f1.hash, f1.relative_residual});

  Vec tau(tg.instants());
  for (int k = 0; k < tg.instants(); ++k) tau[k] = bump((tg.time(k) - 0.5 * tg.T) / (0.5 * tg.T));
  const double width = 2.0 * a / mesh.cells();
  for (int m = 0; m < mesh.cells(); ++m) {
    const double centre = 0.5 * (mesh.edges[m] + mesh.edges[m + 1]);
    Vec s(grid.omega_count());
    for (int j = 0; j < grid.omega_count(); ++j)
      s[j] = bump((grid.coords[grid.omega_nodes[j]][0] - centre) / (1.5 * width));
    const ControlFit f2 = fit_control(w2, separable(s, tau));
    out.push_back({"phi2[" + std::to_string(m) + "]", "cell bump at x=" + format_double(centre), f2.hash,
                   f2.relative_residual});
  }
  return out;
}

namespace {

struct BornOutcome {
  Vec x;  // stacked cell corrections, one block per field
  std::vector<IterationRecord> history;
  std::vector<ProbeRecord> probes;
  std::vector<std::string> warnings;
};

BornOutcome born_inversion(const FractionalOperator& op, const Coefficients& reference,
                           const MeasurementSource& source, const std::vector<LinearField>& fields,
                           const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2,
                           const TimeGrid& tg, const LinearInversionOptions& options) {
  const SpatialGrid& grid = op.grid();
  if (basis1.empty() || basis2.empty()) throw ConfigError("inversion needs nonempty bases in both windows");
  if (options.ladder.size() < 3) throw ConfigError("L-curve ladder needs at least 3 values");
  if (options.iterations < 1) throw ConfigError("inversion needs at least one iteration");
  const RecoveryMesh mesh = RecoveryMesh::make(grid, options.cells);
  const int nc = mesh.cells();
  const int nf = static_cast<int>(fields.size());
  const double dt = tg.dt(), h = grid.cell_volume();

  const Mat measured = source.measure(basis1, basis2, tg).values;
  if (measured.rows() != static_cast<Eigen::Index>(basis2.size()) ||
      measured.cols() != static_cast<Eigen::Index>(basis1.size()))
    throw ShapeError("measured DN matrix does not match the bases");

  const Mat L1 = penalty_matrix(nc, options.identity_weight);
  Mat L = Mat::Zero(nf * L1.rows(), nf * nc);
  for (int f = 0; f < nf; ++f) L.block(f * L1.rows(), f * nc, L1.rows(), nc) = L1;
  const Mat LL = L.transpose() * L;

  BornOutcome out;
  Vec x = Vec::Zero(nf * nc);
  for (int it = 0; it < options.iterations; ++it) {
    const Coefficients model = with_correction(reference, grid, fields, mesh, x);
    const RungeBasis r1 = RungeBasis::compute(op, model, basis1, tg);
    const RungeBasis r2 = RungeBasis::compute(op, model, basis2, tg);
    if (it == 0) {
      out.probes = probe_inventory(r1, r2, mesh, fields.front());
      int weak = 0;
      for (const auto& p : out.probes) weak += p.relative_residual > options.runge_warn;
      if (weak > 0)
        out.warnings.push_back(std::to_string(weak) + " of " + std::to_string(out.probes.size()) +
                               " probe fits have Runge residual above " + format_double(options.runge_warn) +
                               "; probe substitution error may dominate");
    }

    std::vector<Mat> b;
    for (const Mat& r : r2.responses())
      b.push_back(interval_average(options.model_reversal == Reversal::star ? time_reverse(r) : r));
    Mat R(static_cast<Eigen::Index>(basis1.size() * basis2.size()), nf * nc);
    Vec colscale(nf * nc);
    for (int f = 0; f < nf; ++f) {
      std::vector<Mat> a;
      for (const Mat& r : r1.responses())
        a.push_back(fields[f] == LinearField::potential ? interval_average(r) : interval_difference(r, dt));
      Mat Rf = sensitivity_rows(a, b, mesh, dt, h);
      // Blocks are balanced so one penalty weight serves every field.
      const double norm = Rf.norm();
      if (!(norm > 0.0))
        throw IllConditionedError("probe system has no sensitivity; add more or better spread basis bumps");
      R.middleCols(f * nc, nc) = Rf / norm;
      colscale.segment(f * nc, nc).setConstant(norm);
    }

    const Vec y = x.cwiseProduct(colscale);
    const Vec misfit = flatten_rows(measured - dn_matrix(op, model, basis1, basis2, tg).values);
    const Vec bb = misfit + R * y;
    const Mat RR = R.transpose() * R;
    if (it == 0) {
      Eigen::SelfAdjointEigenSolver<Mat> eig(RR);
      const double lmax = eig.eigenvalues().maxCoeff(), lmin = eig.eigenvalues().minCoeff();
      if (!(lmin > 1e-14 * lmax))
        out.warnings.push_back("probe system is numerically rank deficient; more or better spread W2 bumps would help");
    }
    const Vec rhs = R.transpose() * bb;
    const double scale = RR.trace() / LL.trace();

    std::vector<Vec> sols;
    std::vector<std::array<double, 2>> pts;
    for (double rel : options.ladder) {
      const Vec sol = (RR + rel * scale * LL).ldlt().solve(rhs);
      pts.push_back({std::log(std::max((R * sol - bb).norm(), 1e-300)), std::log(std::max((L * sol).norm(), 1e-300))});
      sols.push_back(sol);
    }
    std::size_t pick = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const double k = menger(pts[i - 1], pts[i], pts[i + 1]);
      if (k > best) {
        best = k;
        pick = i;
      }
    }
    // Zero data: every ladder point is the zero vector and no correction is due.
    if (bb.norm() == 0.0) sols[pick].setZero();
    out.history.push_back({static_cast<int>(pick), options.ladder[pick] * scale, misfit.norm(),
                           (R * sols[pick] - bb).norm(), (L * sols[pick]).norm()});
    x = sols[pick].cwiseQuotient(colscale);
  }
  out.x = x;
  return out;
}

InversionResult to_result(const BornOutcome& born, const Coefficients& reference, const SpatialGrid& grid,
                          const RecoveryMesh& mesh, LinearField field, int block) {
  InversionResult result;
  result.kind = field == LinearField::potential ? "potential" : "damping";
  result.cells = born.x.segment(block * mesh.cells(), mesh.cells());
  const Vec base = field == LinearField::potential ? reference.q : reference.gamma_omega(grid);
  result.field = base + mesh.expand(result.cells);
  result.history = born.history;
  result.probes = born.probes;
  result.warnings = born.warnings;
  return result;
}

}  // namespace

InversionResult recover_linear(const FractionalOperator& op, const Coefficients& reference,
                               const MeasurementSource& source, LinearField field,
                               const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2,
                               const TimeGrid& tg, const LinearInversionOptions& options) {
  const BornOutcome born = born_inversion(op, reference, source, {field}, basis1, basis2, tg, options);
  return to_result(born, reference, op.grid(), RecoveryMesh::make(op.grid(), options.cells), field, 0);
}

std::pair<InversionResult, InversionResult> recover_joint(
    const FractionalOperator& op, const Coefficients& reference, const MeasurementSource& source,
    const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2, const TimeGrid& tg,
    const LinearInversionOptions& options) {
  const BornOutcome born = born_inversion(op, reference, source, {LinearField::potential, LinearField::damping},
                                          basis1, basis2, tg, options);
  const RecoveryMesh mesh = RecoveryMesh::make(op.grid(), options.cells);
  return {to_result(born, reference, op.grid(), mesh, LinearField::potential, 0),
          to_result(born, reference, op.grid(), mesh, LinearField::damping, 1)};
}

std::pair<InversionResult, InversionResult> recover_potential_then_damping(
    const FractionalOperator& op, const Coefficients& reference, const MeasurementSource& source,
    const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2, const TimeGrid& tg,
    const LinearInversionOptions& options) {
  auto [q, g] = recover_joint(op, reference, source, basis1, basis2, tg, options);
  Coefficients matched = reference;
  matched.q = q.field;
  g = recover_damping(op, matched, source, basis1, basis2, tg, options);
  return {std::move(q), std::move(g)};
}

Trajectory SyntheticSemilinearTwin::respond(const ExteriorData& data, const TimeGrid& tg) const {
  return solve_semilinear(op_, gamma_, hidden_, data, tg, options_).trajectory;
}

double relative_field_error(const Vec& recovered, const Vec& truth, const Mask& recoverable) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    if (!recoverable[j]) continue;
    num += (recovered[j] - truth[j]) * (recovered[j] - truth[j]);
    den += truth[j] * truth[j];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

NonlinearityRecovery recover_nonlinearity(const FractionalOperator& op, const Vec& gamma,
                                          const InteriorMeasurement& measurement,
                                          const std::vector<ExteriorData>& probes,
                                          const std::vector<double>& epsilons, const TimeGrid& tg,
                                          const NonlinearInversionOptions& options) {
  const SpatialGrid& grid = op.grid();
  const double h = grid.cell_volume(), dt = tg.dt();
  if (probes.empty()) throw ConfigError("nonlinearity recovery needs at least one probe");
  if (epsilons.size() < 4) throw ConfigError("amplitude scan needs at least 4 amplitudes");
  for (std::size_t k = 1; k < epsilons.size(); ++k)
    if (!(epsilons[k] < epsilons[k - 1]) || !(epsilons[k] > 0.0))
      throw ConfigError("amplitudes must be positive and strictly decreasing");
  if (!(options.exponent_step > 0.0)) throw ConfigError("exponent_step must be positive");

  Coefficients lin = Coefficients::zero(grid);
  lin.gamma = gamma;
  std::vector<Mat> v;
  for (const auto& eta : probes) v.push_back(solve_inhomogeneous(op, lin, Source(), eta, tg).u_omega(grid));
  auto sup_norm = [h](const Mat& m) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < m.cols(); ++k) s = std::max(s, std::sqrt(h * m.col(k).squaredNorm()));
    return s;
  };
  const double vsup = sup_norm(v.front());

  NonlinearityRecovery out;
  std::vector<double> eps_kept, norms, dropped;
  for (double eps : epsilons) {
    Trajectory traj;
    try {
      traj = measurement.respond(probes.front().scaled(eps), tg);
    } catch (const DivergenceError& e) {
      std::cerr << "recover_nonlinearity: dropping eps = " << eps << ": " << e.what() << "\n";
      dropped.push_back(eps);
      continue;
    }
    const double sup = sup_norm(traj.u_omega(grid) - eps * v.front());
    eps_kept.push_back(eps);
    norms.push_back(sup <= 1e-12 * eps * vsup ? 0.0 : sup);
  }
  out.scan = fit_amplitude_scan(eps_kept, norms, dropped);
  out.slope = out.scan.slope;
  out.qf = Vec::Zero(grid.omega_count());
  out.recoverable.assign(grid.omega_count(), false);

  // Recoverability depends only on the linear responses.
  double vmax = 0.0;
  for (const Mat& m : v) vmax = std::max(vmax, m.cwiseAbs().maxCoeff());
  for (int j = 0; j < grid.omega_count(); ++j) {
    for (const Mat& m : v) out.recoverable[j] = out.recoverable[j] || m.row(j).cwiseAbs().maxCoeff() >= options.v_floor * vmax;
    if (!out.recoverable[j]) out.flagged.push_back(j);
  }

  if (std::isinf(out.slope)) {
    out.r_hat = std::numeric_limits<double>::quiet_NaN();
    return out;  // linear data: q_f = 0 wherever recoverable
  }
  out.r_hat = std::round((out.slope - 1.0) / options.exponent_step) * options.exponent_step;
  if (!(out.r_hat > 0.0)) throw ScanError("amplitude scan slope " + format_double(out.slope) + " implies r <= 0");

  for (std::size_t k = eps_kept.size(); k-- > 0;) {
    if (norms[k] >= options.reliable_floor * eps_kept[k] * vsup) {
      out.epsilon_used = eps_kept[k];
      break;
    }
  }
  if (out.epsilon_used == 0.0) throw ScanError("no amplitude resolves the nonlinear remainder above roundoff");

  const double eps = out.epsilon_used;
  const Vec gamma_om = grid.restrict_to_omega(gamma);
  Vec num = Vec::Zero(grid.omega_count()), den = Vec::Zero(grid.omega_count());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const Trajectory traj = measurement.respond(probes[p].scaled(eps), tg);
    const Mat vo = traj.v_omega(grid);
    // Interval nonlinearity read off the midpoint scheme.
    const Mat fbar = -(interval_difference(vo, dt) + gamma_om.asDiagonal() * interval_average(vo) +
                       interval_average(op.omega_rows() * traj.u));
    const Mat model = std::pow(eps, out.r_hat + 1.0) *
                      interval_average(v[p].unaryExpr([r = out.r_hat](double z) { return std::pow(std::abs(z), r) * z; }));
    num += fbar.cwiseProduct(model).rowwise().sum();
    den += model.cwiseProduct(model).rowwise().sum();
  }
  for (int j = 0; j < grid.omega_count(); ++j)
    if (out.recoverable[j] && den[j] > 0.0) out.qf[j] = num[j] / den[j];
  return out;
}

}  // namespace nlwave
