#pragma once

#include "nlwave/forward.hpp"

#include <string>
#include <vector>

namespace nlwave {

/// Whether test functions are time reversed before pairing. `none` is the
/// negative control; the identities only close with `star`.
enum class Reversal { star, none };

/// Entry (j, i) = <Lambda phi_i, psi_j^*>; rows index basis2 (W2), columns basis1 (W1).
struct DNMatrix {
  Mat values;
  std::vector<std::string> col_basis;
  std::vector<std::string> row_basis;
  std::string coefficients_hash;
  std::string grid;
  double dt = 0.0;
  int n_steps = 0;
  std::string time_rule;
  std::string reversal;

  /// Values as CSV plus a JSON sidecar at `csv_path + ".json"`.
  void write(const std::string& csv_path) const;
};

/// int <A u_phi, psi> over space-time (full grid). Throws ConfigError when phi
/// is not compatible or either datum leaves its window.
double dn_pairing(const FractionalOperator& op, const Coefficients& coeffs, const ExteriorData& phi,
                  const ExteriorData& psi, const TimeGrid& tg, TimeRule rule = TimeRule::scheme);

/// One forward solve per column.
DNMatrix dn_matrix(const FractionalOperator& op, const Coefficients& coeffs, const std::vector<BumpElement>& basis1,
                   const std::vector<BumpElement>& basis2, const TimeGrid& tg, Reversal reversal = Reversal::star,
                   TimeRule rule = TimeRule::scheme);

struct AdjointnessDefect {
  double defect = 0.0;  // max_ij |<Lambda phi_i, psi_j*> - <Lambda psi_j, phi_i*>|
  double scale = 0.0;   // max |entry|
};

AdjointnessDefect check_self_adjointness(const FractionalOperator& op, const Coefficients& coeffs,
                                         const std::vector<BumpElement>& basis1,
                                         const std::vector<BumpElement>& basis2, const TimeGrid& tg,
                                         Reversal reversal = Reversal::star, TimeRule rule = TimeRule::scheme);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double defect = 0.0;
};

/// <(Lambda_1 - Lambda_2) phi1, phi2*> against
/// int {[(gamma1 - gamma2) d/dt + q1 - q2](u1 - phi1)} (u2 - phi2)*.
/// The trapezoid rule uses centered differences for d/dt; the scheme rule
/// uses interval differences and averages.
IdentityCheck check_integral_identity(const FractionalOperator& op, const Coefficients& c1, const Coefficients& c2,
                                      const ExteriorData& phi1, const ExteriorData& phi2, const TimeGrid& tg,
                                      TimeRule rule = TimeRule::scheme);

/// Full-grid samples of the datum at every instant, one column per instant.
Mat sample_exterior(const SpatialGrid& grid, const ExteriorData& data, const TimeGrid& tg);
/// Centered differences in time (one-sided at the ends), column per instant.
Mat centered_time_derivative(const Mat& a, double dt);

}  // namespace nlwave
