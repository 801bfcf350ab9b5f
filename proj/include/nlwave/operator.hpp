#pragma once

#include "nlwave/grid.hpp"

#include <memory>
#include <string>

namespace nlwave {

/// Normalization c_{n,s} of the hypersingular integral form of (-Delta)^s.
double fractional_constant(int dimension, double s);

struct QuadratureMeta {
  std::string scheme;            // human-readable description
  double normalization = 0.0;    // c_{n,s}
  double tail_radius = 0.0;      // zero extension beyond this box half-width
  double singular_weight = 0.0;  // coefficient of the own-cell Laplacian correction
};

/// Dense symmetric discretization of (-Delta)^s on a truncated grid, with its
/// eigendecomposition. Immutable after construction; copies share storage.
class FractionalOperator {
 public:
  /// Throws DomainError unless 0 < s < 1.
  static FractionalOperator build(const SpatialGrid& grid, double s);

  const SpatialGrid& grid() const { return state_->grid; }
  double exponent() const { return state_->s; }
  const Mat& matrix() const { return state_->A; }
  const Vec& eigenvalues() const { return state_->lambda; }
  const Mat& eigenvectors() const { return state_->V; }
  const QuadratureMeta& quadrature() const { return state_->meta; }

  /// A restricted to Omega rows and columns.
  const Mat& interior_block() const { return state_->A_interior; }
  /// Omega rows of A, all columns.
  const Mat& omega_rows() const { return state_->A_omega_rows; }

  Vec apply(const Vec& u) const;
  /// A^{1/2} u through the stored eigenpairs.
  Vec half_power_apply(const Vec& u) const;
  /// (h^n sum (A^{1/2} u)_i^2)^{1/2}.
  double hs_seminorm(const Vec& u) const;

 private:
  struct State {
    SpatialGrid grid;
    double s = 0.5;
    Mat A;
    Vec lambda;
    Mat V;
    Mat A_interior;
    Mat A_omega_rows;
    QuadratureMeta meta;
  };
  explicit FractionalOperator(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  void check_shape(const Vec& u) const;

  std::shared_ptr<const State> state_;
};

/// A applied to the profile (1 - |x|^2)_+^s, whose exact image is the constant
/// 2^{2s} Gamma(1+s) Gamma(n/2+s) / Gamma(n/2) on the unit ball.
struct ConsistencyReport {
  double exact = 0.0;
  double max_deviation = 0.0;  // max |A w - exact| over the sampled nodes
  double spread = 0.0;         // max - min of A w over the sampled nodes
  int nodes = 0;
};

/// Samples nodes with |x| <= radius (< 1).
ConsistencyReport profile_consistency(const FractionalOperator& op, double radius = 0.5);

}  // namespace nlwave
