#pragma once

#include "nlwave/coeffs.hpp"
#include "nlwave/exterior.hpp"
#include "nlwave/operator.hpp"
#include "nlwave/time_pairing.hpp"

#include <Eigen/LU>

#include <random>
#include <vector>

namespace nlwave {

struct TimeGrid {
  double T = 1.0;
  int n_steps = 100;

  /// Throws ConfigError unless T > 0 and n_steps >= 2.
  static TimeGrid make(double T, int n_steps);
  double dt() const { return T / n_steps; }
  double time(int k) const { return k * dt(); }
  int instants() const { return n_steps + 1; }
};

/// Full-grid samples of (u, d/dt u), one column per instant.
struct Trajectory {
  Vec times;
  Mat u;
  Mat v;
  std::string scheme = "implicit-midpoint";
  std::string label;

  Mat u_omega(const SpatialGrid& grid) const;
  Mat v_omega(const SpatialGrid& grid) const;
};

/// Node-sampled interior source: Omega rows, one column per instant. An empty
/// matrix stands for F = 0.
using Source = Mat;

/// One implicit midpoint step of u' = v, v' = -Gamma v - K u + f on Omega nodes,
/// with K = A_OmegaOmega + diag(q). The midpoint matrix is factored once.
class MidpointStepper {
 public:
  MidpointStepper(const FractionalOperator& op, const Vec& gamma_omega, const Vec& q, double dt);

  /// Advances (u, v) in place with the interval source f (Omega vector).
  void step(Vec& u, Vec& v, const Vec& f) const;
  const Mat& stiffness() const { return K_; }
  double dt() const { return dt_; }

 private:
  Mat K_;
  Mat explicit_part_;  // I - dt/2 Gamma - dt^2/4 K
  Eigen::PartialPivLU<Mat> implicit_;
  double dt_;
};

/// Zero exterior values, Omega initial data (u0, u1).
Trajectory solve_homogeneous(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                             const Vec& u0, const Vec& u1, const TimeGrid& tg);

/// Lifting u = w + phi. Initial data are full-grid vectors whose exterior part
/// must match phi(0), phi'(0); throws ConfigError otherwise.
Trajectory solve_inhomogeneous(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                               const ExteriorData& exterior, const Vec& u0, const Vec& u1, const TimeGrid& tg);
/// Convenience overload with zero initial data.
Trajectory solve_inhomogeneous(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                               const ExteriorData& exterior, const TimeGrid& tg);

/// Interior source of the lifted problem for w = u - phi:
///   F - (A phi)|_Omega - (phi'' + gamma phi' + q phi)|_Omega.
Source lifting_source(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                      const ExteriorData& exterior, const TimeGrid& tg);
/// u = phi + w, v = phi' + w' from interior columns W, Wv.
Trajectory assemble_lifted(const SpatialGrid& grid, const TimeGrid& tg, const ExteriorData& exterior, const Mat& W,
                           const Mat& Wv);

/// Terminal value problem for the operator with damping -gamma:
///   v'' - gamma v' + A v + q v = F, v = phi outside Omega, v(T) = uT, v'(T) = vT.
/// Solved by reversing time, stepping forward with +gamma, and reversing back.
Trajectory solve_backward(const FractionalOperator& op, const Coefficients& coeffs, const Source& F,
                          const ExteriorData& exterior, const Vec& uT, const Vec& vT, const TimeGrid& tg);

/// ||v(t)||^2 + ||A^{1/2} u(t)||^2 per instant.
Vec discrete_energy(const FractionalOperator& op, const Trajectory& traj);

/// Per-instant defect of the energy identity
///   E(t) - E(0) + 2 int_0^t <gamma v + q u, v> - 2 int_0^t <F, v>
/// with the chosen time rule. Exact to roundoff for the scheme rule.
Vec energy_identity_residual(const FractionalOperator& op, const Trajectory& traj, const Coefficients& coeffs,
                             const Source& F, double dt, TimeRule rule = TimeRule::trapezoid);

/// sup_t (||v|| + ||A^{1/2}u||) / (||u1|| + ||A^{1/2}u0|| + ||F||_{L2L2}).
double gronwall_ratio(const FractionalOperator& op, const Trajectory& traj, const Source& F, double dt);

struct TranspositionOptions {
  TimeRule rule = TimeRule::scheme;
  bool include_gamma_term = true;  // false is the ablation control
  int modes = 3;                   // random probes span modes x modes space-time sines
};

struct TranspositionReport {
  std::vector<double> defects;  // absolute, per probe
  std::vector<double> scales;   // largest term magnitude, per probe
  double max_defect = 0.0;
  double max_relative = 0.0;
};

/// Random smooth interior field built from low space-time modes.
Source random_smooth_source(const SpatialGrid& grid, const TimeGrid& tg, std::mt19937_64& rng, int modes = 3);

/// Checks int<G,u> - int<F,v> - <u1,v(0)> + <u0,v'(0)> - <gamma u0, v(0)> = 0
/// for random probes G, where v solves the adjoint terminal problem with data G.
TranspositionReport verify_transposition(const FractionalOperator& op, const Coefficients& coeffs, const Vec& u0,
                                         const Vec& u1, const Source& F, const TimeGrid& tg, int n_probes,
                                         std::mt19937_64& rng, const TranspositionOptions& options = {});

}  // namespace nlwave
