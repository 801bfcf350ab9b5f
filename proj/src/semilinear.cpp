#include "nlwave/semilinear.hpp"

#include "nlwave/errors.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

namespace nlwave {

namespace {

struct Interior {
  Mat U;
  Mat V;
};

// Interval source n: lift + (-f(u_n) - f(u_{n+1}))/2 with the nonlinearity
// evaluated on the previous iterate (picard) or lagged one step (imex).
Interior march_picard(const MidpointStepper& stepper, const Source& lift, const Nonlinearity& f, const Mat* prev,
                      const TimeGrid& tg) {
  const Eigen::Index m = lift.rows();
  Interior out{Mat(m, tg.instants()), Mat(m, tg.instants())};
  Vec u = Vec::Zero(m), v = Vec::Zero(m);
  out.U.col(0) = u;
  out.V.col(0) = v;
  Vec f_prev = prev ? eval_nonlinearity(f, prev->col(0)) : Vec::Zero(m);
  for (int n = 0; n < tg.n_steps; ++n) {
    Vec src = 0.5 * (lift.col(n) + lift.col(n + 1));
    if (prev) {
      const Vec f_next = eval_nonlinearity(f, prev->col(n + 1));
      src -= 0.5 * (f_prev + f_next);
      f_prev = f_next;
    }
    stepper.step(u, v, src);
    out.U.col(n + 1) = u;
    out.V.col(n + 1) = v;
  }
  return out;
}

Interior march_imex(const MidpointStepper& stepper, const Source& lift, const Nonlinearity& f, const TimeGrid& tg) {
  const Eigen::Index m = lift.rows();
  Interior out{Mat(m, tg.instants()), Mat(m, tg.instants())};
  Vec u = Vec::Zero(m), v = Vec::Zero(m);
  out.U.col(0) = u;
  out.V.col(0) = v;
  for (int n = 0; n < tg.n_steps; ++n) {
    const Vec src = 0.5 * (lift.col(n) + lift.col(n + 1)) - eval_nonlinearity(f, u);
    stepper.step(u, v, src);
    out.U.col(n + 1) = u;
    out.V.col(n + 1) = v;
  }
  return out;
}

double weighted_sup(const Vec& a, const Vec& b, double theta, const Vec& times) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s = std::max(s, std::exp(-theta * times[k]) * (a[k] + b[k]));
  return s;
}

}  // namespace

NegativeNorm::NegativeNorm(const FractionalOperator& op)
    : chol_(op.interior_block()), h_(op.grid().cell_volume()) {
  if (chol_.info() != Eigen::Success) throw InternalError("interior block is not positive definite");
}

double NegativeNorm::operator()(const Vec& dv) const { return std::sqrt(h_ * dv.dot(chol_.solve(dv))); }

std::vector<double> SemilinearResult::gaps(double th, const Vec& times) const {
  std::vector<double> out;
  for (const auto& it : log) out.push_back(weighted_sup(it.du, it.dv, th, times));
  return out;
}

std::vector<double> SemilinearResult::ratios(double th, const Vec& times) const {
  const auto g = gaps(th, times);
  std::vector<double> out;
  for (std::size_t k = 1; k < g.size(); ++k) out.push_back(g[k - 1] > 0.0 ? g[k] / g[k - 1] : 0.0);
  return out;
}

SemilinearResult solve_semilinear(const FractionalOperator& op, const Vec& gamma, const Nonlinearity& f,
                                  const ExteriorData& exterior, const TimeGrid& tg,
                                  const SemilinearOptions& options) {
  const SpatialGrid& grid = op.grid();
  validate_support(exterior, grid);
  validate_compatibility(exterior);
  if (f.qf.size() != grid.omega_count()) throw ShapeError("nonlinearity field must be an Omega vector");

  Coefficients lin = Coefficients::zero(grid);
  lin.gamma = gamma;
  lin.label = "semilinear";
  const Source lift = lifting_source(op, lin, Source(), exterior, tg);
  const MidpointStepper stepper(op, lin.gamma_omega(grid), lin.q, tg.dt());

  SemilinearResult result;
  result.theta = options.theta;
  if (options.mode == SemilinearMode::imex) {
    Interior w = march_imex(stepper, lift, f, tg);
    result.trajectory = assemble_lifted(grid, tg, exterior, w.U, w.V);
    result.trajectory.scheme = "implicit-midpoint/imex";
    return result;
  }

  const NegativeNorm neg(op);
  const double h = grid.cell_volume();
  Vec times(tg.instants());
  for (int k = 0; k < tg.instants(); ++k) times[k] = tg.time(k);

  Interior cur = march_picard(stepper, lift, f, nullptr, tg);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    Interior next = march_picard(stepper, lift, f, &cur.U, tg);
    PicardIterate rec{Vec(tg.instants()), Vec(tg.instants()), 0.0};
    Vec usize(tg.instants()), vsize(tg.instants());
    for (int k = 0; k < tg.instants(); ++k) {
      rec.du[k] = std::sqrt(h * (next.U.col(k) - cur.U.col(k)).squaredNorm());
      rec.dv[k] = neg(next.V.col(k) - cur.V.col(k));
      usize[k] = std::sqrt(h * next.U.col(k).squaredNorm());
      vsize[k] = neg(next.V.col(k));
    }
    rec.weighted_gap = weighted_sup(rec.du, rec.dv, result.theta, times);
    result.log.push_back(rec);
    cur = std::move(next);

    const double scale = weighted_sup(usize, vsize, result.theta, times);
    if (rec.weighted_gap <= options.tolerance * scale || rec.weighted_gap == 0.0) {
      result.trajectory = assemble_lifted(grid, tg, exterior, cur.U, cur.V);
      result.trajectory.scheme = "implicit-midpoint/picard";
      return result;
    }
    if (result.log.size() < 2) continue;

    auto ratio = [&] {
      const auto g = result.gaps(result.theta, times);
      const double prev = g[g.size() - 2];
      return prev > 0.0 ? g.back() / prev : 0.0;
    };
    double r = ratio();
    while (r >= options.target_ratio && result.escalations < options.max_escalations) {
      result.theta *= options.escalation_factor;
      ++result.escalations;
      r = ratio();
    }
    if (r >= 1.0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "picard iteration does not contract: gap ratio %.3g at theta %.3g after %d sweeps",
                    r, result.theta, iter + 1);
      throw DivergenceError(buf, result.gaps(result.theta, times));
    }
  }
  throw DivergenceError("picard iteration reached max_iter without meeting the tolerance",
                        result.gaps(result.theta, times));
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("linear_fit needs matching samples (>= 2)");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

AmplitudeScan fit_amplitude_scan(std::vector<double> epsilons, std::vector<double> norms,
                                 std::vector<double> dropped) {
  AmplitudeScan scan;
  scan.epsilons = std::move(epsilons);
  scan.norms = std::move(norms);
  scan.dropped = std::move(dropped);
  if (scan.epsilons.size() < 3) throw ScanError("amplitude scan kept fewer than 3 amplitudes");

  bool all_zero = true;
  for (double n : scan.norms) all_zero = all_zero && n == 0.0;
  if (all_zero) {
    scan.slope = std::numeric_limits<double>::infinity();
    return scan;
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < scan.norms.size(); ++k) {
    if (scan.norms[k] <= 0.0) continue;
    lx.push_back(std::log(scan.epsilons[k]));
    ly.push_back(std::log(scan.norms[k]));
  }
  if (lx.size() < 3) throw ScanError("amplitude scan has fewer than 3 nonzero remainders");
  std::tie(scan.slope, scan.intercept) = linear_fit(lx, ly);
  return scan;
}

AmplitudeScan amplitude_scan(const FractionalOperator& op, const Vec& gamma, const Nonlinearity& f,
                             const ExteriorData& eta, const std::vector<double>& epsilons, const TimeGrid& tg,
                             const SemilinearOptions& options) {
  if (epsilons.size() < 4) throw ConfigError("amplitude scan needs at least 4 amplitudes");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) throw ConfigError("amplitudes must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) throw ConfigError("amplitudes must be strictly decreasing");
  }
  if (std::log10(epsilons.front() / epsilons.back()) < 1.5 - 1e-12)
    throw ConfigError("amplitudes must span at least 1.5 decades");

  const SpatialGrid& grid = op.grid();
  const double h = grid.cell_volume();
  Coefficients lin = Coefficients::zero(grid);
  lin.gamma = gamma;
  const Mat v = solve_inhomogeneous(op, lin, Source(), eta, tg).u_omega(grid);
  double vsup = 0.0;
  for (Eigen::Index k = 0; k < v.cols(); ++k) vsup = std::max(vsup, std::sqrt(h * v.col(k).squaredNorm()));

  AmplitudeScan scan;
  for (double eps : epsilons) {
    SemilinearResult run;
    try {
      run = solve_semilinear(op, gamma, f, eta.scaled(eps), tg, options);
    } catch (const DivergenceError& e) {
      std::cerr << "amplitude_scan: dropping eps = " << eps << ": " << e.what() << "\n";
      scan.dropped.push_back(eps);
      continue;
    }
    const Mat R = run.trajectory.u_omega(grid) - eps * v;
    double sup = 0.0;
    for (Eigen::Index k = 0; k < R.cols(); ++k) sup = std::max(sup, std::sqrt(h * R.col(k).squaredNorm()));
    // Remainders at roundoff level of the linear response count as zero.
    scan.epsilons.push_back(eps);
    scan.norms.push_back(sup <= 1e-12 * eps * vsup ? 0.0 : sup);
  }
  return fit_amplitude_scan(std::move(scan.epsilons), std::move(scan.norms), std::move(scan.dropped));
}

}  // namespace nlwave
