#pragma once

#include "nlwave/forward.hpp"

#include <limits>
#include <string>
#include <vector>

namespace nlwave {

enum class SemilinearMode { imex, picard };

struct SemilinearOptions {
  SemilinearMode mode = SemilinearMode::picard;
  double theta = 1.0;         // initial weight in e^{-theta t}
  double tolerance = 1e-12;   // relative weighted gap
  int max_iter = 200;
  int max_escalations = 3;
  double escalation_factor = 4.0;
  double target_ratio = 0.5;  // escalate while the measured ratio stays above this
};

/// One Picard sweep: per-instant gap norms ||du||_{L2} and ||dv||_{H^{-s}}.
struct PicardIterate {
  Vec du;
  Vec dv;
  double weighted_gap = 0.0;  // at the theta in force when it was recorded
};

struct SemilinearResult {
  Trajectory trajectory;
  std::vector<PicardIterate> log;
  double theta = 0.0;
  int escalations = 0;

  /// sup_t e^{-theta t}(du + dv) for every logged sweep at weight theta.
  std::vector<double> gaps(double theta, const Vec& times) const;
  /// Successive ratios of gaps(theta).
  std::vector<double> ratios(double theta, const Vec& times) const;
};

/// Solves u'' + gamma u' + A u + f(u) = 0 with exterior data and zero initial data.
/// imex: f evaluated at the previous step. picard: fixed point of the
/// inhomogeneous linear solve with node source -f(u^(m)). Throws DivergenceError.
SemilinearResult solve_semilinear(const FractionalOperator& op, const Vec& gamma, const Nonlinearity& f,
                                  const ExteriorData& exterior, const TimeGrid& tg,
                                  const SemilinearOptions& options = {});

/// ||dv||_{H^{-s}} realized as sqrt(h dv^T A_OmegaOmega^{-1} dv).
class NegativeNorm {
 public:
  explicit NegativeNorm(const FractionalOperator& op);
  double operator()(const Vec& dv_omega) const;

 private:
  Eigen::LLT<Mat> chol_;
  double h_;
};

struct AmplitudeScan {
  std::vector<double> epsilons;  // strictly decreasing, survivors only
  std::vector<double> norms;     // sup_t ||u_eps - eps v||_{L2(Omega)}
  std::vector<double> dropped;   // amplitudes whose semilinear solve diverged
  double slope = 0.0;            // +inf when every remainder vanishes
  double intercept = 0.0;
};

/// Remainder decay of the amplitude expansion u_eps = eps v + R_eps.
/// Throws ConfigError on an invalid ladder and ScanError with < 3 survivors.
AmplitudeScan amplitude_scan(const FractionalOperator& op, const Vec& gamma, const Nonlinearity& f,
                             const ExteriorData& eta, const std::vector<double>& epsilons, const TimeGrid& tg,
                             const SemilinearOptions& options = {});

/// Log-log fit of remainder norms; zero remainders everywhere give slope +inf.
/// Throws ScanError with fewer than 3 usable points.
AmplitudeScan fit_amplitude_scan(std::vector<double> epsilons, std::vector<double> norms,
                                 std::vector<double> dropped = {});

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nlwave
