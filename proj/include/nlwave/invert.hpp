#pragma once

#include "nlwave/dnmap.hpp"
#include "nlwave/runge.hpp"
#include "nlwave/semilinear.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nlwave {

/// Black-box DN measurements. The inverter sees matrices only, never the
/// coefficients that produced them.
class MeasurementSource {
 public:
  virtual ~MeasurementSource() = default;
  virtual DNMatrix measure(const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2,
                           const TimeGrid& tg) const = 0;
};

/// Simulator holding hidden coefficients.
class SyntheticTwin : public MeasurementSource {
 public:
  SyntheticTwin(const FractionalOperator& op, Coefficients hidden) : op_(op), hidden_(std::move(hidden)) {}
  DNMatrix measure(const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2,
                   const TimeGrid& tg) const override;

 private:
  FractionalOperator op_;
  Coefficients hidden_;
};

/// Piecewise-constant cells along the first axis of Omega.
struct RecoveryMesh {
  Mat indicator;  // cells x Omega nodes
  Vec edges;

  static RecoveryMesh make(const SpatialGrid& grid, int cells);
  int cells() const { return static_cast<int>(indicator.rows()); }
  Vec average(const Vec& omega_field) const;
  Vec expand(const Vec& cell_values) const;
};

/// Fixed L-curve ladder 10^{-3 - 0.5 i}, i = 0..7.
std::vector<double> default_ladder();

struct LinearInversionOptions {
  int cells = 16;
  int iterations = 5;
  /// lambda_i = ladder_i * trace(R^T R) / trace(L^T L).
  std::vector<double> ladder = default_ladder();
  double identity_weight = 1e-2;  // L = [first differences; identity_weight I]
  Reversal model_reversal = Reversal::star;
  double runge_warn = 0.5;  // relative probe residual that triggers a warning
};

struct ProbeRecord {
  std::string role;  // "phi1", "phi2[k]", "basis"
  std::string description;
  std::string fit_hash;
  double relative_residual = 0.0;
};

struct IterationRecord {
  int chosen = 0;  // ladder index
  double lambda = 0.0;
  double misfit = 0.0;       // ||b|| before the update
  double residual = 0.0;     // ||R x - bb|| at the chosen point
  double seminorm = 0.0;     // ||L x|| at the chosen point
};

struct InversionResult {
  std::string kind;  // "potential", "damping", "nonlinearity"
  Vec field;         // Omega nodes: reference plus recovered correction
  Vec cells;         // correction on the recovery mesh
  std::optional<double> relative_error;  // synthetic mode only
  std::vector<ProbeRecord> probes;
  std::vector<IterationRecord> history;
  std::vector<std::string> warnings;
};

enum class LinearField { potential, damping };

/// Born iteration over every (W1, W2) basis pair:
///   D_meas - D_model ~ sum_k x_k int chi_k (d/dt or 1) w1_i (w2_j)^*,
/// solved by gradient-penalized Tikhonov with an L-curve pick per iteration.
/// `reference` fixes every field not being recovered.
InversionResult recover_linear(const FractionalOperator& op, const Coefficients& reference,
                               const MeasurementSource& source, LinearField field,
                               const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2,
                               const TimeGrid& tg, const LinearInversionOptions& options = {});

inline InversionResult recover_potential(const FractionalOperator& op, const Coefficients& reference,
                                         const MeasurementSource& source, const std::vector<BumpElement>& basis1,
                                         const std::vector<BumpElement>& basis2, const TimeGrid& tg,
                                         const LinearInversionOptions& options = {}) {
  return recover_linear(op, reference, source, LinearField::potential, basis1, basis2, tg, options);
}

inline InversionResult recover_damping(const FractionalOperator& op, const Coefficients& reference,
                                       const MeasurementSource& source, const std::vector<BumpElement>& basis1,
                                       const std::vector<BumpElement>& basis2, const TimeGrid& tg,
                                       const LinearInversionOptions& options = {}) {
  return recover_linear(op, reference, source, LinearField::damping, basis1, basis2, tg, options);
}

/// Both corrections from one stacked Born system, blocks balanced by norm.
std::pair<InversionResult, InversionResult> recover_joint(
    const FractionalOperator& op, const Coefficients& reference, const MeasurementSource& source,
    const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2, const TimeGrid& tg,
    const LinearInversionOptions& options = {});

/// q first (from the joint system, so damping cannot leak into it), then
/// gamma re-recovered with the matched q as reference.
std::pair<InversionResult, InversionResult> recover_potential_then_damping(
    const FractionalOperator& op, const Coefficients& reference, const MeasurementSource& source,
    const std::vector<BumpElement>& basis1, const std::vector<BumpElement>& basis2, const TimeGrid& tg,
    const LinearInversionOptions& options = {});

/// Relative L2 error of the recovered cells against the cell averages of `truth - reference`.
double relative_cell_error(const RecoveryMesh& mesh, const Vec& recovered_cells, const Vec& truth_correction);

/// Runge fits of the proof's probes from the given bases: a time-constant
/// cutoff (smoothed at both ends, or its time integral for damping) from
/// basis1 and one separable bump per cell from basis2. Diagnostics only.
std::vector<ProbeRecord> probe_inventory(const RungeBasis& w1, const RungeBasis& w2, const RecoveryMesh& mesh,
                                         LinearField field);

/// Semilinear interior responses for exterior data; hides f from the inverter.
class InteriorMeasurement {
 public:
  virtual ~InteriorMeasurement() = default;
  /// Full-grid trajectory for the data. Throws DivergenceError.
  virtual Trajectory respond(const ExteriorData& data, const TimeGrid& tg) const = 0;
};

class SyntheticSemilinearTwin : public InteriorMeasurement {
 public:
  SyntheticSemilinearTwin(const FractionalOperator& op, Vec gamma, Nonlinearity hidden,
                          SemilinearOptions options = {})
      : op_(op), gamma_(std::move(gamma)), hidden_(std::move(hidden)), options_(options) {}
  Trajectory respond(const ExteriorData& data, const TimeGrid& tg) const override;

 private:
  FractionalOperator op_;
  Vec gamma_;
  Nonlinearity hidden_;
  SemilinearOptions options_;
};

struct NonlinearInversionOptions {
  double exponent_step = 0.25;
  double v_floor = 0.05;        // relative to max |v| over all probes
  double reliable_floor = 1e-9;  // remainder must exceed this fraction of eps sup ||v||
};

struct NonlinearityRecovery {
  double r_hat = 0.0;
  double slope = 0.0;
  double epsilon_used = 0.0;
  Vec qf;                 // Omega nodes; 0 where unrecoverable
  Mask recoverable;
  std::vector<int> flagged;  // Omega indices below v_floor for every probe
  AmplitudeScan scan;
  std::optional<double> relative_error;
};

/// r from the amplitude scan of the first probe, snapped to the exponent grid;
/// q_f by per-node least squares of the extracted interval nonlinearity against
/// eps^{r+1} avg(|v|^r v), pooled over probes, at the smallest reliable eps.
NonlinearityRecovery recover_nonlinearity(const FractionalOperator& op, const Vec& gamma,
                                          const InteriorMeasurement& measurement,
                                          const std::vector<ExteriorData>& probes,
                                          const std::vector<double>& epsilons, const TimeGrid& tg,
                                          const NonlinearInversionOptions& options = {});

/// Relative L2 error on recoverable nodes.
double relative_field_error(const Vec& recovered, const Vec& truth, const Mask& recoverable);

}  // namespace nlwave
