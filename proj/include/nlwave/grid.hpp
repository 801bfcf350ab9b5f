#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <string>
#include <vector>

namespace nlwave {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Mask = std::vector<bool>;

/// Open interval along the first axis; in 2D the window spans |x_1| < transverse.
struct WindowSpec {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  double transverse = 1.0;
};

struct GridSpec {
  int dimension = 1;
  double box_halfwidth = 2.0;     // truncation box [-R, R]^n
  int points_per_axis = 64;
  double omega_halfwidth = 1.0;   // Omega = (-a, a)^n
  std::vector<WindowSpec> windows{{"W1", -1.8, -1.2, 1.0}, {"W2", 1.2, 1.8, 1.0}};
};

/// Uniform tensor grid on the truncation box with the domain and exterior window masks.
struct SpatialGrid {
  GridSpec spec;
  double spacing = 0.0;
  std::vector<std::array<double, 2>> coords;  // second entry unused in 1D
  Mask omega;
  std::map<std::string, Mask> windows;
  std::vector<int> omega_nodes;  // ascending grid indices of Omega nodes

  int dimension() const { return spec.dimension; }
  int node_count() const { return static_cast<int>(coords.size()); }
  int omega_count() const { return static_cast<int>(omega_nodes.size()); }
  /// Quadrature weight of one node, h^n.
  double cell_volume() const;
  const Mask& window(const std::string& name) const;

  /// Restriction of a full-grid vector to Omega nodes.
  Vec restrict_to_omega(const Vec& full) const;
  /// Zero extension of an Omega vector to the full grid.
  Vec extend_from_omega(const Vec& interior) const;
};

/// Builds and validates the grid. Throws ConfigError on invalid layout.
SpatialGrid make_grid(const GridSpec& spec);

/// Discrete L2 inner product <a, b> = h^n sum a_i b_i.
double inner(const SpatialGrid& grid, const Vec& a, const Vec& b);

}  // namespace nlwave
