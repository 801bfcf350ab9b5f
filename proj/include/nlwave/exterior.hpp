#pragma once

#include "nlwave/grid.hpp"

#include <array>
#include <string>
#include <vector>

namespace nlwave {

/// chi(x) = prod_k (1 - ((x_k - c_k)/w_k)^2)_+^3; the second factor is ignored in 1D.
struct SpaceBump {
  std::array<double, 2> center{0.0, 0.0};
  std::array<double, 2> halfwidth{0.1, 1.0};

  double operator()(const std::array<double, 2>& x, int dimension) const;
};

/// sigma(t) = (1 - ((t - c)/w)^2)_+^3, twice continuously differentiable.
struct TimeBump {
  double center = 0.5;
  double halfwidth = 0.5;

  double value(double t) const;
  double first(double t) const;
  double second(double t) const;
  /// Mirror image t -> T - t.
  TimeBump reversed(double T) const { return {T - center, halfwidth}; }
};

/// One separable element beta(x, t) = chi(x) sigma(t) attached to a named window.
struct BumpElement {
  std::string window;
  SpaceBump space;
  TimeBump time;

  std::string describe() const;
};

/// Finite combination sum_k c_k beta_k of exterior bumps.
struct ExteriorData {
  std::vector<BumpElement> elements;
  std::vector<double> coefficients;

  static ExteriorData single(const BumpElement& e, double coefficient = 1.0) { return {{e}, {coefficient}}; }
  bool empty() const { return elements.empty(); }

  /// Full-grid samples of phi, d/dt phi and d^2/dt^2 phi at time t.
  Vec value(const SpatialGrid& grid, double t) const;
  Vec velocity(const SpatialGrid& grid, double t) const;
  Vec acceleration(const SpatialGrid& grid, double t) const;

  ExteriorData reversed(double T) const;
  ExteriorData scaled(double factor) const;
  /// Concatenation; the result represents the sum of both data.
  ExteriorData operator+(const ExteriorData& other) const;
};

/// Throws ConfigError when an element is nonzero off its window mask or on Omega.
void validate_support(const ExteriorData& data, const SpatialGrid& grid);
/// Throws ConfigError unless sigma(0) = sigma'(0) = 0 for every element.
void validate_compatibility(const ExteriorData& data);

/// Tensor family: every spatial bump times every time bump of a hierarchical
/// ladder. Time bumps overlap and the last one reaches past T.
std::vector<BumpElement> tensor_family(const std::string& window, const std::vector<SpaceBump>& spatial,
                                       int time_count, double T);

}  // namespace nlwave
