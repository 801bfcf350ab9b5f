#include "nlwave/operator.hpp"

#include "nlwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace nlwave {

namespace {

// Integral of |z|^{-n-2s} over the cell of side h centred at offset (di, dj)*h,
// excluding the own cell. 1D cells are integrated exactly.
double cell_weight_1d(int di, double h, double s) {
  const double d = std::abs(di) * h;
  return (std::pow(d - 0.5 * h, -2.0 * s) - std::pow(d + 0.5 * h, -2.0 * s)) / (2.0 * s);
}

double cell_weight_2d(int di, int dj, double h, double s) {
  const int near = std::max(std::abs(di), std::abs(dj));
  const int sub = near <= 1 ? 32 : (near <= 3 ? 8 : 1);
  const double step = h / sub;
  double acc = 0.0;
  for (int a = 0; a < sub; ++a) {
    for (int b = 0; b < sub; ++b) {
      const double x = di * h - 0.5 * h + (a + 0.5) * step;
      const double y = dj * h - 0.5 * h + (b + 0.5) * step;
      acc += std::pow(x * x + y * y, -1.0 - s);
    }
  }
  return acc * step * step;
}

// int over the unit cell of z_1^2 |z|^{-n-2s} dz.
double unit_cell_second_moment(int dimension, double s) {
  if (dimension == 1) return 2.0 * std::pow(0.5, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  // (1/2) int_{unit square} |z|^{-2s} dz in polar coordinates over 8 congruent triangles.
  const int n = 4000;
  const double quarter = std::numbers::pi / 4.0;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = (k + 0.5) * quarter / n;
    acc += std::pow(0.5 / std::cos(theta), 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  }
  return 0.5 * 8.0 * acc * quarter / n;
}

// int over R^n outside the box [-L, L]^n of |x - y|^{-n-2s} dy.
double tail_integral(const std::array<double, 2>& x, int dimension, double L, double s) {
  if (dimension == 1) {
    return (std::pow(L - x[0], -2.0 * s) + std::pow(L + x[0], -2.0 * s)) / (2.0 * s);
  }
  const int n = 4096;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = (k + 0.5) * 2.0 * std::numbers::pi / n;
    const double c = std::cos(theta), sn = std::sin(theta);
    double dist = std::numeric_limits<double>::infinity();
    if (c > 0) dist = std::min(dist, (L - x[0]) / c);
    if (c < 0) dist = std::min(dist, (-L - x[0]) / c);
    if (sn > 0) dist = std::min(dist, (L - x[1]) / sn);
    if (sn < 0) dist = std::min(dist, (-L - x[1]) / sn);
    acc += std::pow(dist, -2.0 * s) / (2.0 * s);
  }
  return acc * 2.0 * std::numbers::pi / n;
}

}  // namespace

double fractional_constant(int dimension, double s) {
  const double n = dimension;
  return std::pow(4.0, s) * std::tgamma(0.5 * n + s) /
         (std::pow(std::numbers::pi, 0.5 * n) * std::abs(std::tgamma(-s)));
}

FractionalOperator FractionalOperator::build(const SpatialGrid& grid, double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("fractional exponent s must lie in (0, 1)");
  if (grid.spec.points_per_axis < 8) throw ConfigError("grid needs at least 8 nodes per axis");

  auto state = std::make_shared<State>();
  state->grid = grid;
  state->s = s;

  const int n = grid.dimension();
  const int m = grid.spec.points_per_axis;
  const int N = grid.node_count();
  const double h = grid.spacing;
  const double c = fractional_constant(n, s);
  const double kappa = std::pow(h, -2.0 * s) * unit_cell_second_moment(n, s) / 2.0;
  const double L = grid.spec.box_halfwidth + 0.5 * h;

  // Offset-indexed kernel weights, shared by all node pairs.
  const int span = 2 * m - 1;
  std::vector<double> weights(n == 1 ? span : span * span, 0.0);
  auto widx = [&](int di, int dj) { return (di + m - 1) + (n == 1 ? 0 : (dj + m - 1) * span); };
  for (int dj = (n == 1 ? 0 : -(m - 1)); dj <= (n == 1 ? 0 : m - 1); ++dj) {
    for (int di = -(m - 1); di <= m - 1; ++di) {
      if (di == 0 && dj == 0) continue;
      double w = n == 1 ? cell_weight_1d(di, h, s) : cell_weight_2d(di, dj, h, s);
      if (std::abs(di) + std::abs(dj) == 1) w += kappa;
      weights[widx(di, dj)] = w;
    }
  }

  Mat& A = state->A;
  A = Mat::Zero(N, N);
  for (int a = 0; a < N; ++a) {
    const int ia = a % m, ja = a / m;
    double row = 0.0;
    for (int b = 0; b < N; ++b) {
      if (b == a) continue;
      const int ib = b % m, jb = b / m;
      const double w = weights[widx(ib - ia, jb - ja)];
      A(a, b) = -c * w;
      row += w;
    }
    // Neighbours outside the box carry zero values but still belong to the
    // own-cell Laplacian stencil.
    const int missing = 2 * n - (ia > 0) - (ia < m - 1) - (n == 2 ? (ja > 0) + (ja < m - 1) : 0);
    row += missing * kappa;
    A(a, a) = c * (row + tail_integral(grid.coords[a], n, L, s));
  }
  // Exact symmetrization guards against summation-order roundoff in the row loop.
  A = 0.5 * (A + A.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> eig(A);
  if (eig.info() != Eigen::Success) throw InternalError("eigendecomposition of the fractional operator failed");
  state->lambda = eig.eigenvalues();
  state->V = eig.eigenvectors();

  const int k = grid.omega_count();
  state->A_interior.resize(k, k);
  state->A_omega_rows.resize(k, N);
  for (int r = 0; r < k; ++r) {
    state->A_omega_rows.row(r) = A.row(grid.omega_nodes[r]);
    for (int q = 0; q < k; ++q) state->A_interior(r, q) = A(grid.omega_nodes[r], grid.omega_nodes[q]);
  }

  std::ostringstream desc;
  desc << "hypersingular quadrature, " << (n == 1 ? "exact 1D cell integrals" : "subcell midpoint 2D cell integrals")
       << ", own-cell Laplacian correction, analytic far-field tail beyond box";
  state->meta = {desc.str(), c, L, c * kappa};
  return FractionalOperator(std::move(state));
}

void FractionalOperator::check_shape(const Vec& u) const {
  if (u.size() != grid().node_count()) throw ShapeError("operator: vector length does not match grid");
}

Vec FractionalOperator::apply(const Vec& u) const {
  check_shape(u);
  return matrix() * u;
}

Vec FractionalOperator::half_power_apply(const Vec& u) const {
  check_shape(u);
  const Vec roots = eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eigenvectors() * (roots.asDiagonal() * (eigenvectors().transpose() * u));
}

double FractionalOperator::hs_seminorm(const Vec& u) const {
  const Vec half = half_power_apply(u);
  return std::sqrt(grid().cell_volume() * half.squaredNorm());
}

ConsistencyReport profile_consistency(const FractionalOperator& op, double radius) {
  if (!(radius > 0.0 && radius < 1.0)) throw ConfigError("profile_consistency: radius must lie in (0, 1)");
  const SpatialGrid& g = op.grid();
  const double s = op.exponent(), half_n = 0.5 * g.dimension();
  Vec w(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) {
    const auto& x = g.coords[i];
    const double r2 = x[0] * x[0] + (g.dimension() == 2 ? x[1] * x[1] : 0.0);
    w[i] = std::pow(std::max(0.0, 1.0 - r2), s);
  }
  const Vec Aw = op.apply(w);

  ConsistencyReport out;
  out.exact = std::pow(2.0, 2.0 * s) * std::tgamma(1.0 + s) * std::tgamma(half_n + s) / std::tgamma(half_n);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < g.node_count(); ++i) {
    const auto& x = g.coords[i];
    if (x[0] * x[0] + (g.dimension() == 2 ? x[1] * x[1] : 0.0) > radius * radius) continue;
    out.max_deviation = std::max(out.max_deviation, std::abs(Aw[i] - out.exact));
    lo = std::min(lo, Aw[i]);
    hi = std::max(hi, Aw[i]);
    ++out.nodes;
  }
  if (out.nodes == 0) throw ConfigError("profile_consistency: no nodes inside the sampling radius");
  out.spread = hi - lo;
  return out;
}

}  // namespace nlwave
