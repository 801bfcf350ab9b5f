#include "nlwave/exterior.hpp"

#include "nlwave/errors.hpp"

#include <cmath>
#include <cstdio>

namespace nlwave {

namespace {

constexpr double kSupportTol = 1e-14;

// (1 - z^2)_+^3 and its first two derivatives in z.
double cubic_bump(double z) {
  const double a = 1.0 - z * z;
  return a > 0.0 ? a * a * a : 0.0;
}
double cubic_bump_d1(double z) {
  const double a = 1.0 - z * z;
  return a > 0.0 ? -6.0 * z * a * a : 0.0;
}
double cubic_bump_d2(double z) {
  const double a = 1.0 - z * z;
  return a > 0.0 ? -6.0 * a * a + 24.0 * z * z * a : 0.0;
}

template <class Fn>
Vec sample(const ExteriorData& data, const SpatialGrid& grid, Fn&& time_factor) {
  Vec out = Vec::Zero(grid.node_count());
  for (std::size_t k = 0; k < data.elements.size(); ++k) {
    const auto& e = data.elements[k];
    const double tf = data.coefficients[k] * time_factor(e.time);
    if (tf == 0.0) continue;
    for (int i = 0; i < grid.node_count(); ++i) out[i] += tf * e.space(grid.coords[i], grid.dimension());
  }
  return out;
}

}  // namespace

double SpaceBump::operator()(const std::array<double, 2>& x, int dimension) const {
  double v = cubic_bump((x[0] - center[0]) / halfwidth[0]);
  if (dimension == 2 && v != 0.0) v *= cubic_bump((x[1] - center[1]) / halfwidth[1]);
  return v;
}

double TimeBump::value(double t) const { return cubic_bump((t - center) / halfwidth); }
double TimeBump::first(double t) const { return cubic_bump_d1((t - center) / halfwidth) / halfwidth; }
double TimeBump::second(double t) const {
  return cubic_bump_d2((t - center) / halfwidth) / (halfwidth * halfwidth);
}

std::string BumpElement::describe() const {
  char buf[192];
  std::snprintf(buf, sizeof buf, "%s:x=(%.6g,%.6g)+-(%.6g,%.6g):t=%.6g+-%.6g", window.c_str(), space.center[0],
                space.center[1], space.halfwidth[0], space.halfwidth[1], time.center, time.halfwidth);
  return buf;
}

Vec ExteriorData::value(const SpatialGrid& grid, double t) const {
  return sample(*this, grid, [t](const TimeBump& b) { return b.value(t); });
}
Vec ExteriorData::velocity(const SpatialGrid& grid, double t) const {
  return sample(*this, grid, [t](const TimeBump& b) { return b.first(t); });
}
Vec ExteriorData::acceleration(const SpatialGrid& grid, double t) const {
  return sample(*this, grid, [t](const TimeBump& b) { return b.second(t); });
}

ExteriorData ExteriorData::reversed(double T) const {
  ExteriorData out = *this;
  for (auto& e : out.elements) e.time = e.time.reversed(T);
  return out;
}

ExteriorData ExteriorData::scaled(double factor) const {
  ExteriorData out = *this;
  for (auto& c : out.coefficients) c *= factor;
  return out;
}

ExteriorData ExteriorData::operator+(const ExteriorData& other) const {
  ExteriorData out = *this;
  out.elements.insert(out.elements.end(), other.elements.begin(), other.elements.end());
  out.coefficients.insert(out.coefficients.end(), other.coefficients.begin(), other.coefficients.end());
  return out;
}

void validate_support(const ExteriorData& data, const SpatialGrid& grid) {
  if (data.coefficients.size() != data.elements.size())
    throw ConfigError("exterior data: coefficient count does not match element count");
  for (const auto& e : data.elements) {
    const Mask& mask = grid.window(e.window);
    for (int i = 0; i < grid.node_count(); ++i) {
      if (std::abs(e.space(grid.coords[i], grid.dimension())) <= kSupportTol) continue;
      if (!mask[i] || grid.omega[i])
        throw ConfigError("exterior bump " + e.describe() + " is nonzero outside window " + e.window);
    }
  }
}

void validate_compatibility(const ExteriorData& data) {
  for (const auto& e : data.elements) {
    if (e.time.center - e.time.halfwidth < -1e-12)
      throw ConfigError("exterior bump " + e.describe() + " is active at t = 0; initial data would be incompatible");
  }
}

std::vector<BumpElement> tensor_family(const std::string& window, const std::vector<SpaceBump>& spatial,
                                       int time_count, double T) {
  if (time_count < 1) throw ConfigError("tensor_family: need at least one time bump");
  std::vector<BumpElement> out;
  const double w = 2.5 * T / time_count;
  for (int j = 0; j < time_count; ++j) {
    const double c = time_count == 1 ? w : w + j * (T - 0.5 * w) / (time_count - 1);
    for (const auto& sb : spatial) out.push_back({window, sb, {c, w}});
  }
  return out;
}

}  // namespace nlwave
