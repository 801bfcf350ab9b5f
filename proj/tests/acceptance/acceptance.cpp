// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "../oracles/modal.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/experiments.hpp"
#include "nlwave/invert.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace nlwave;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SpatialGrid grid1d(int points) {
  GridSpec gs;
  gs.points_per_axis = points;
  return make_grid(gs);
}

Vec omega_field(const SpatialGrid& g, const std::function<double(double)>& f) {
  Vec out(g.omega_count());
  for (int j = 0; j < g.omega_count(); ++j) out[j] = f(g.coords[g.omega_nodes[j]][0]);
  return out;
}

Vec full_field(const SpatialGrid& g, const std::function<double(double)>& f) {
  Vec out(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) out[i] = f(g.coords[i][0]);
  return out;
}

Mat space_time(const SpatialGrid& g, const TimeGrid& tg, const std::function<double(double, double)>& f) {
  Mat out(g.omega_count(), tg.instants());
  for (int k = 0; k < tg.instants(); ++k)
    for (int j = 0; j < g.omega_count(); ++j) out(j, k) = f(g.coords[g.omega_nodes[j]][0], tg.time(k));
  return out;
}

double gaussian(double x, double c, double w) { return std::exp(-0.5 * (x - c) * (x - c) / (w * w)); }

// Random smooth nonnegative damping: a positive floor plus low modes squared.
Vec random_damping(const SpatialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a0 = 0.05 + 0.5 * u(rng), a1 = u(rng), a2 = u(rng), ph = 2 * std::numbers::pi * u(rng);
  return full_field(g, [&](double x) {
    const double m = a1 * std::sin(x + ph) + a2 * std::cos(2 * x);
    return a0 + 0.5 * m * m;
  });
}

// ------------------------------------------------------------------ criteria

Outcome c01_operator_consistency() {
  std::vector<double> dev, spread;
  for (int n : {32, 64, 128}) {
    const ConsistencyReport r = profile_consistency(FractionalOperator::build(grid1d(n), 0.5), 0.5);
    dev.push_back(r.max_deviation);
    spread.push_back(r.spread);
  }
  const double s1 = std::log2(dev[0] / dev[1]), s2 = std::log2(dev[1] / dev[2]);
  return {std::min(s1, s2) >= 0.8 && spread[2] < spread[1] && spread[1] < spread[0],
          fmt("max|A w - 1| = %.2e, %.2e, %.2e at N = 32, 64, 128; slopes %.2f, %.2f (>= 0.8)", dev[0], dev[1],
              dev[2], s1, s2)};
}

Outcome c02_spectral_oracle() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  Coefficients c = Coefficients::zero(g);
  const double gamma = 0.5, T = 1.0;
  c.gamma.setConstant(gamma);
  const Vec u0 = omega_field(g, [](double x) { return std::cos(0.5 * std::numbers::pi * x); });
  const Vec u1 = omega_field(g, [](double x) { return std::sin(std::numbers::pi * x); });

  std::vector<double> err;
  for (int steps : {50, 100, 200}) {
    const TimeGrid tg = TimeGrid::make(T, steps);
    const Trajectory tr = solve_homogeneous(op, c, Source{}, u0, u1, tg);
    double worst = 0.0, scale = 0.0;
    for (int k = 0; k < tg.instants(); ++k) {
      const Vec exact = oracle::modal_solution(op.interior_block(), gamma, u0, u1, tg.time(k)).first;
      worst = std::max(worst, (g.restrict_to_omega(tr.u.col(k)) - exact).norm());
      scale = std::max(scale, exact.norm());
    }
    err.push_back(worst / scale);
  }
  const double s1 = std::log2(err[0] / err[1]), s2 = std::log2(err[1] / err[2]);
  return {std::abs(s1 - 2.0) <= 0.2 && std::abs(s2 - 2.0) <= 0.2,
          fmt("max rel error %.2e, %.2e, %.2e at dt = T/50, T/100, T/200; slopes %.3f, %.3f (2 +- 0.2)", err[0],
              err[1], err[2], s1, s2)};
}

Outcome c03_energy_identity() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  std::mt19937_64 rng(31);
  const Vec u0 = omega_field(g, [](double x) { return std::cos(0.5 * std::numbers::pi * x); });
  const Vec u1 = omega_field(g, [](double x) { return x * std::cos(0.5 * std::numbers::pi * x); });

  const Coefficients zero = Coefficients::zero(g);
  const TimeGrid tg = TimeGrid::make(2.0, 200);
  const Trajectory free = solve_homogeneous(op, zero, Source{}, u0, u1, tg);
  const Vec E = discrete_energy(op, free);
  const double conserved =
      energy_identity_residual(op, free, zero, Source{}, tg.dt(), TimeRule::trapezoid).cwiseAbs().maxCoeff() / E[0];

  Coefficients c = Coefficients::zero(g);
  c.gamma = full_field(g, [](double x) { return 0.4 + 0.2 * std::sin(x); });
  c.q = omega_field(g, [](double x) { return 0.5 * gaussian(x, 0.1, 0.35); });
  std::vector<double> trap;
  double scheme = 0.0;
  for (int steps : {100, 200, 400}) {
    const TimeGrid t = TimeGrid::make(2.0, steps);
    std::mt19937_64 local(7);
    const Source F = random_smooth_source(g, t, local);
    const Trajectory tr = solve_homogeneous(op, c, F, u0, u1, t);
    const double scale = discrete_energy(op, tr).maxCoeff();
    trap.push_back(energy_identity_residual(op, tr, c, F, t.dt(), TimeRule::trapezoid).cwiseAbs().maxCoeff() / scale);
    scheme = std::max(scheme,
                      energy_identity_residual(op, tr, c, F, t.dt(), TimeRule::scheme).cwiseAbs().maxCoeff() / scale);
  }
  const double o1 = std::log2(trap[0] / trap[1]), o2 = std::log2(trap[1] / trap[2]);
  const bool pass = conserved <= 1e-10 && std::abs(o1 - 2.0) <= 0.3 && std::abs(o2 - 2.0) <= 0.3;
  return {pass, fmt("gamma=q=F=0: %.1e (<= 1e-10); active terms, trapezoid: %.2e, %.2e, %.2e, orders %.2f, %.2f; "
                    "scheme pairing %.1e",
                    conserved, trap[0], trap[1], trap[2], o1, o2, scheme)};
}

Outcome c04_dissipation() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  std::mt19937_64 rng(404);
  const TimeGrid tg = TimeGrid::make(2.0, 100);
  int violations = 0;
  double worst = -1.0;
  for (int trial = 0; trial < 20; ++trial) {
    Coefficients c = Coefficients::zero(g);
    c.gamma = random_damping(g, rng);
    const Vec u0 = random_smooth_source(g, tg, rng).col(0);
    const Vec u1 = random_smooth_source(g, tg, rng).col(0);
    const Vec E = discrete_energy(op, solve_homogeneous(op, c, Source{}, u0, u1, tg));
    for (int k = 1; k < E.size(); ++k) {
      const double rise = (E[k] - E[k - 1]) / E[0];
      worst = std::max(worst, rise);
      violations += rise > 1e-14;
    }
  }
  return {violations == 0, fmt("20 seeded cases x 100 steps, %d increases; largest step change %.1e of E(0)",
                               violations, worst)};
}

Outcome c05_time_reversal() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const TimeGrid tg = TimeGrid::make(1.0 + u(rng), 60 + 20 * trial);
    Coefficients c = Coefficients::zero(g);
    c.gamma = random_damping(g, rng);
    c.q = random_smooth_source(g, TimeGrid::make(1.0, 2), rng).col(0).cwiseAbs();
    const Source F = random_smooth_source(g, tg, rng);
    const Vec u0 = random_smooth_source(g, tg, rng).col(0), u1 = random_smooth_source(g, tg, rng).col(0);
    const Trajectory fwd = solve_homogeneous(op, c, F, u0, u1, tg);
    Coefficients flipped = c;
    flipped.gamma = -c.gamma;
    const Trajectory back =
        solve_backward(op, flipped, F, ExteriorData{}, fwd.u.col(tg.n_steps), fwd.v.col(tg.n_steps), tg);
    worst = std::max(worst, (back.u - fwd.u).cwiseAbs().maxCoeff() / fwd.u.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("10 random problems, max node-wise relative gap %.1e (<= 1e-10)", worst)};
}

Outcome c06_transposition() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  std::mt19937_64 rng(606);
  const TimeGrid tg = TimeGrid::make(2.0, 200);
  Coefficients c = Coefficients::zero(g);
  c.gamma = random_damping(g, rng);
  c.q = omega_field(g, [](double x) { return 0.3 + 0.2 * x; });
  const Source F = random_smooth_source(g, tg, rng);
  const Vec u0 = random_smooth_source(g, tg, rng).col(0), u1 = random_smooth_source(g, tg, rng).col(0);
  const TranspositionReport rep = verify_transposition(op, c, u0, u1, F, tg, 8, rng);
  TranspositionOptions ablate;
  ablate.include_gamma_term = false;
  const TranspositionReport ab = verify_transposition(op, c, u0, u1, F, tg, 8, rng, ablate);
  return {rep.max_relative <= 1e-8 && ab.max_relative >= 0.1,
          fmt("8 probes: max relative defect %.1e (<= 1e-8); without the gamma term %.2f (O(1))", rep.max_relative,
              ab.max_relative)};
}

Outcome c07_dn_self_adjointness() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  Coefficients c = Coefficients::zero(g);
  c.gamma = full_field(g, [](double x) { return 0.3 + 0.2 * std::tanh(x); });
  c.q = omega_field(g, [](double x) { return 0.5 * gaussian(x, 0.1, 0.35); });
  const auto [b1, b2] = dn_bases(3, 2.0);

  bool pass = true;
  std::string detail;
  for (TimeRule rule : {TimeRule::scheme, TimeRule::trapezoid}) {
    std::vector<double> rel, dts;
    for (int steps : {100, 200, 400}) {
      const TimeGrid tg = TimeGrid::make(2.0, steps);
      const AdjointnessDefect d = check_self_adjointness(op, c, b1, b2, tg, Reversal::star, rule);
      rel.push_back(d.defect / d.scale);
      dts.push_back(tg.dt());
    }
    // C from the coarsest level; finer levels must respect max(1e-9, C dt^2).
    const double C = rel[0] / (dts[0] * dts[0]);
    bool bound = true, roundoff = true;
    for (std::size_t k = 0; k < rel.size(); ++k) {
      bound = bound && rel[k] <= std::max(1e-9, C * dts[k] * dts[k]) * (1.0 + 1e-12);
      roundoff = roundoff && rel[k] <= 1e-9;
    }
    const bool decays = roundoff || (rel[0] / rel[1] >= 3.0 && rel[1] / rel[2] >= 3.0);
    pass = pass && bound && decays;
    detail += fmt("%s %.1e, %.1e, %.1e%s; ", to_string(rule).c_str(), rel[0], rel[1], rel[2],
                  roundoff ? " (roundoff regime)" : "");
  }
  const AdjointnessDefect none =
      check_self_adjointness(op, c, b1, b2, TimeGrid::make(2.0, 200), Reversal::none, TimeRule::scheme);
  return {pass, "3x3 bases, dt = T/100..T/400: " + detail + fmt("control without reversal %.2f", none.defect / none.scale)};
}

Outcome c08_integral_identity() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  Coefficients base = Coefficients::zero(g);
  base.gamma = full_field(g, [](double x) { return 0.3 + 0.1 * std::cos(x); });
  base.q = omega_field(g, [](double) { return 0.2; });
  const auto [b1, b2] = dn_bases(3, 2.0);
  const ExteriorData phi1 = ExteriorData::single(b1[0]), phi2 = ExteriorData::single(b2[2]);

  Coefficients dq = base, dg = base;
  dq.q += omega_field(g, [](double x) { return 0.5 * gaussian(x, 0.1, 0.35); });
  dg.gamma += full_field(g, [](double x) { return std::abs(x) < 1.0 ? 0.25 * (1.0 + std::tanh(x / 0.25)) : 0.0; });

  bool pass = true;
  std::string detail;
  for (const auto& [name, c1] : {std::pair<std::string, Coefficients>{"dq", dq}, {"dgamma", dg}}) {
    std::vector<double> C, rel;
    double scheme = 0.0;
    for (int steps : {100, 200, 400}) {
      const TimeGrid tg = TimeGrid::make(2.0, steps);
      const IdentityCheck r = check_integral_identity(op, c1, base, phi1, phi2, tg, TimeRule::trapezoid);
      const double scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
      rel.push_back(r.defect / scale);
      C.push_back(r.defect / (scale * tg.dt() * tg.dt()));
      const IdentityCheck s = check_integral_identity(op, c1, base, phi1, phi2, tg, TimeRule::scheme);
      scheme = std::max(scheme, s.defect / std::max(std::abs(s.lhs), std::abs(s.rhs)));
    }
    const bool roundoff = *std::max_element(rel.begin(), rel.end()) <= 1e-12;
    const double spread = *std::max_element(C.begin(), C.end()) / *std::min_element(C.begin(), C.end());
    pass = pass && (roundoff || spread <= 2.0);
    detail += roundoff ? fmt("%s: trapezoid defect %.1e (roundoff), scheme %.1e; ", name.c_str(), rel.back(), scheme)
                       : fmt("%s: C = %.2f, %.2f, %.2f (max/min %.2f), scheme %.1e; ", name.c_str(), C[0], C[1], C[2],
                             spread, scheme);
  }
  return {pass, detail};
}

struct RungeSetup {
  SpatialGrid grid = grid1d(65);
  FractionalOperator op = FractionalOperator::build(grid, 0.5);
  TimeGrid tg = TimeGrid::make(2.0, 200);
  Coefficients coeffs = [this] {
    Coefficients c = Coefficients::zero(grid);
    c.gamma.setConstant(0.2);
    return c;
  }();
  RungeBasis basis = RungeBasis::compute(op, coeffs, tensor_family("W1", default_spatial_family("W1"), 8, tg.T), tg);
};

const RungeSetup& runge_setup() {
  static const RungeSetup s;
  return s;
}

Mat runge_target(int which) {
  const RungeSetup& s = runge_setup();
  const double T = s.tg.T;
  if (which == 1)
    return space_time(s.grid, s.tg, [&](double x, double t) { return (t / T) * (t / T) * std::sqrt(1.0 - x * x); });
  return space_time(s.grid, s.tg, [&](double x, double t) {
    const double st = std::sin(std::numbers::pi * t / T);
    return st * st * (1.0 - x * x) * (1.0 - x * x);
  });
}

Outcome c09_runge_decay() {
  const RungeSetup& s = runge_setup();
  bool strict = true;
  double best_terminal = 1.0;
  std::string detail;
  for (int which : {1, 2}) {
    std::vector<double> res;
    for (std::size_t n : {4u, 8u, 16u, 32u}) res.push_back(fit_control(s.basis, runge_target(which), -1.0, n).relative_residual);
    for (std::size_t k = 1; k < res.size(); ++k) strict = strict && res[k] < res[k - 1];
    best_terminal = std::min(best_terminal, res.back());
    detail += fmt("target %d: %.3f, %.3f, %.3f, %.3f; ", which, res[0], res[1], res[2], res[3]);
  }
  return {strict && best_terminal <= 0.1, detail + fmt("best terminal %.3f (<= 0.1)", best_terminal)};
}

Outcome c10_derivative_limit() {
  const RungeSetup& s = runge_setup();
  std::mt19937_64 rng(1010);
  const std::vector<std::size_t> sizes{4, 8, 12, 16, 20, 24, 28, 32};
  const auto suite = random_test_suite(s.grid, s.tg, 8, rng, true);
  const auto bad_suite = random_test_suite(s.grid, s.tg, 8, rng, false);
  const DecayStudy study = runge_decay_study(s.basis, runge_target(1), sizes, suite);
  const Mat offset = space_time(s.grid, s.tg, [&](double x, double t) {
    return (0.5 + (t / s.tg.T) * (t / s.tg.T)) * std::sqrt(1.0 - x * x);
  });
  const DecayStudy control = runge_decay_study(s.basis, offset, sizes, bad_suite, EndConditions::bypass);
  const double pos_shrink = study.defects.back() / study.defects.front();
  const double neg_shrink = control.defects.back() / control.defects.front();
  const double res_shrink = control.residuals.back() / control.residuals.front();
  return {study.pearson >= 0.9 && neg_shrink >= 0.25,
          fmt("%zu fits: Pearson(residual, defect) = %.3f (>= 0.9), defect last/first %.3f; control: residual "
              "last/first %.3f but defect last/first %.2f (>= 0.25)",
              sizes.size(), study.pearson, pos_shrink, res_shrink, neg_shrink)};
}

Outcome c11_linear_inversion() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  const TimeGrid tg = TimeGrid::make(4.0, 400);
  Coefficients ref = Coefficients::zero(g);
  ref.gamma.setConstant(0.3);
  const auto b1 = tensor_family("W1", default_spatial_family("W1"), 10, tg.T);
  const auto b2 = tensor_family("W2", default_spatial_family("W2"), 10, tg.T);
  const LinearInversionOptions opt;
  const RecoveryMesh mesh = RecoveryMesh::make(g, opt.cells);

  const Vec dq = omega_field(g, [](double x) { return 0.5 * gaussian(x, 0.1, 0.35); });
  const Vec dg = omega_field(g, [](double x) { return 0.25 * (1.0 + std::tanh(x / 0.25)); });
  auto hidden = [&](const Vec& q, const Vec& gm) {
    Coefficients c = ref;
    c.q += q;
    c.gamma += g.extend_from_omega(gm);
    return c;
  };
  const Vec none = Vec::Zero(g.omega_count());

  const SyntheticTwin tq(op, hidden(dq, none)), tgm(op, hidden(none, dg)), t0(op, ref), tboth(op, hidden(dq, dg));
  const double eq = relative_cell_error(mesh, recover_potential(op, ref, tq, b1, b2, tg, opt).cells, dq);
  const double eg = relative_cell_error(mesh, recover_damping(op, ref, tgm, b1, b2, tg, opt).cells, dg);
  const double zq = recover_potential(op, ref, t0, b1, b2, tg, opt).cells.norm();
  const double zg = recover_damping(op, ref, t0, b1, b2, tg, opt).cells.norm();

  const auto [q_first, g_after] = recover_potential_then_damping(op, ref, tboth, b1, b2, tg, opt);
  const double ordered = relative_cell_error(mesh, g_after.cells, dg);
  const double early = relative_cell_error(mesh, recover_damping(op, ref, tboth, b1, b2, tg, opt).cells, dg);

  const bool pass = eq <= 0.1 && eg <= 0.1 && zq <= 1e-10 && zg <= 1e-10 && early >= 2.0 * ordered;
  return {pass, fmt("dq bump %.3f, dgamma step %.3f (<= 0.10); zero controls %.1e, %.1e; on mixed data gamma "
                    "error %.3f after q vs %.3f before q (ratio %.1f >= 2)",
                    eq, eg, zq, zg, ordered, early, early / ordered)};
}

Nonlinearity bump_nonlinearity(const SpatialGrid& g, double r) {
  return {omega_field(g, [](double x) { return 2.0 * gaussian(x, 0.1, 0.3); }), r};
}

Outcome c12_semilinear_scaling() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  const TimeGrid tg = TimeGrid::make(2.0, 200);
  const Vec gamma = Vec::Constant(g.node_count(), 0.2);
  const ExteriorData eta = ExteriorData::single({"W1", SpaceBump{{-1.5, 0.0}, {0.3, 1.0}}, TimeBump{1.0, 1.0}});
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.02, 0.01, 0.005};
  bool pass = true;
  std::string detail;
  for (double r : {1.0, 2.0}) {
    const Nonlinearity f = bump_nonlinearity(g, r);
    const AmplitudeScan scan = amplitude_scan(op, gamma, f, eta, eps, tg);
    double worst_ratio = 0.0;
    int escalations = 0;
    for (double e : scan.epsilons) {
      const SemilinearResult run = solve_semilinear(op, gamma, f, eta.scaled(e), tg);
      for (double q : run.ratios(run.theta, run.trajectory.times)) worst_ratio = std::max(worst_ratio, q);
      escalations = std::max(escalations, run.escalations);
    }
    pass = pass && scan.slope >= r + 1.0 - 0.1 && worst_ratio < 1.0 && scan.dropped.empty();
    detail += fmt("r = %g: slope %.3f (>= %.1f), max Picard ratio %.2e, escalations %d; ", r, scan.slope, r + 0.9,
                  worst_ratio, escalations);
  }
  return {pass, detail};
}

Outcome c13_nonlinearity_recovery() {
  const SpatialGrid g = grid1d(64);
  const FractionalOperator op = FractionalOperator::build(g, 0.5);
  const TimeGrid tg = TimeGrid::make(2.0, 200);
  const Vec gamma = Vec::Constant(g.node_count(), 0.2);
  const std::vector<ExteriorData> probes{
      ExteriorData::single({"W1", SpaceBump{{-1.5, 0.0}, {0.3, 1.0}}, TimeBump{1.0, 1.0}})};
  bool pass = true;
  std::string detail;
  for (double r : {1.0, 2.0}) {
    const Nonlinearity f = bump_nonlinearity(g, r);
    const SyntheticSemilinearTwin twin(op, gamma, f);
    const NonlinearityRecovery out =
        recover_nonlinearity(op, gamma, twin, probes, {0.2, 0.1, 0.05, 0.02, 0.01, 0.005}, tg);
    const double err = relative_field_error(out.qf, f.qf, out.recoverable);
    pass = pass && out.r_hat == r && err <= 0.1;
    detail += fmt("r = %g: r_hat %g, q_f error %.1e on %zu/%d nodes; ", r, out.r_hat, err,
                  g.omega_count() - out.flagged.size(), g.omega_count());
  }
  return {pass, detail};
}

Outcome c14_determinism() {
  const fs::path root = fs::temp_directory_path() / "nlwave_acceptance_determinism";
  fs::remove_all(root);
  int files = 0, mismatches = 0, configs = 0;
  for (const auto& entry : fs::directory_iterator(NLWAVE_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    const ExperimentConfig cfg = ExperimentConfig::load(entry.path().string());
    const std::string stem = entry.path().stem().string();
    for (const char* run : {"a", "b"}) {
      try {
        run_experiment(cfg, (root / stem / run).string());
      } catch (const PipelineError&) {
      }
    }
    ++configs;
    for (const auto& f : fs::directory_iterator(root / stem / "a")) {
      if (f.path().extension() != ".csv") continue;
      auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
      };
      ++files;
      mismatches += slurp(f.path()) != slurp(root / stem / "b" / f.path().filename());
    }
  }
  fs::remove_all(root);
  return {files > 0 && mismatches == 0,
          fmt("%d shipped configs rerun, %d CSV tables compared, %d differ", configs, files, mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"operator consistency", c01_operator_consistency},
      {"spectral oracle", c02_spectral_oracle},
      {"energy identity", c03_energy_identity},
      {"energy dissipation", c04_dissipation},
      {"time reversal", c05_time_reversal},
      {"transposition identity", c06_transposition},
      {"DN self-adjointness", c07_dn_self_adjointness},
      {"integral identity", c08_integral_identity},
      {"Runge decay", c09_runge_decay},
      {"time-derivative limit", c10_derivative_limit},
      {"linear inversion", c11_linear_inversion},
      {"semilinear scaling", c12_semilinear_scaling},
      {"nonlinearity recovery", c13_nonlinearity_recovery},
      {"determinism", c14_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !out.pass;
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << (k + 1 < 10 ? "0" : "") << k + 1 << " " << criteria[k].first
              << ": " << out.detail << fmt(" (%.1f s)", secs) << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
