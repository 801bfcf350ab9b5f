#pragma once

#include "nlwave/grid.hpp"

#include <limits>
#include <string>
#include <vector>

namespace nlwave {

/// Damping field on the full grid and potential on Omega nodes.
struct Coefficients {
  Vec gamma;  // full grid; only the Omega restriction enters the dynamics
  Vec q;      // Omega nodes
  double p_exponent = std::numeric_limits<double>::infinity();
  double alpha = 1.0;  // declared Hoelder exponent of gamma
  std::string label = "zero";

  static Coefficients zero(const SpatialGrid& grid);
  Vec gamma_omega(const SpatialGrid& grid) const { return grid.restrict_to_omega(gamma); }
};

struct ConstraintCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConstraintCheck> checks;
  bool pass() const;
  std::string summary() const;
};

/// Checks the integrability window for p and the growth window for r at (n, s).
/// Never throws; each constraint is reported separately.
ValidationReport validate_exponents(int dimension, double s, double p, double r);

/// Shape checks plus alpha > s and the p window. Throws ShapeError / DomainError.
void validate_coefficients(const Coefficients& coeffs, const SpatialGrid& grid, double s);

/// f(x, tau) = q_f(x) |tau|^r tau with q_f >= 0 on Omega nodes.
struct Nonlinearity {
  Vec qf;
  double r = 1.0;
};

Vec eval_nonlinearity(const Nonlinearity& f, const Vec& u);
/// F(x, tau) = q_f(x) |tau|^{r+2} / (r+2).
Vec eval_antiderivative(const Nonlinearity& f, const Vec& u);
/// Throws DomainError when q_f has negative entries or r violates its window.
void validate_nonlinearity(const Nonlinearity& f, int dimension, double s);

/// Analytic coefficient profiles selectable from experiment configs.
struct FieldPreset {
  enum class Kind { constant, gaussian, step };
  Kind kind = Kind::constant;
  double base = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double width = 0.2;
};

FieldPreset::Kind parse_preset_kind(const std::string& name);
/// Full-grid samples; gaussian is radial, step varies along the first axis
/// as a tanh-mollified jump.
Vec evaluate_preset(const FieldPreset& preset, const SpatialGrid& grid);
/// Reads "node,value" rows (header optional); unspecified nodes are zero.
Vec load_field_csv(const std::string& path, const SpatialGrid& grid);

}  // namespace nlwave
