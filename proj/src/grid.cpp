#include "nlwave/grid.hpp"

#include "nlwave/errors.hpp"

#include <cmath>
#include <sstream>

namespace nlwave {

double SpatialGrid::cell_volume() const { return std::pow(spacing, spec.dimension); }

const Mask& SpatialGrid::window(const std::string& name) const {
  auto it = windows.find(name);
  if (it == windows.end()) throw ConfigError("unknown exterior window '" + name + "'");
  return it->second;
}

Vec SpatialGrid::restrict_to_omega(const Vec& full) const {
  if (full.size() != node_count()) throw ShapeError("restrict_to_omega: vector is not a full-grid vector");
  Vec out(omega_count());
  for (int k = 0; k < omega_count(); ++k) out[k] = full[omega_nodes[k]];
  return out;
}

Vec SpatialGrid::extend_from_omega(const Vec& interior) const {
  if (interior.size() != omega_count()) throw ShapeError("extend_from_omega: vector is not an Omega vector");
  Vec out = Vec::Zero(node_count());
  for (int k = 0; k < omega_count(); ++k) out[omega_nodes[k]] = interior[k];
  return out;
}

SpatialGrid make_grid(const GridSpec& spec) {
  if (spec.dimension != 1 && spec.dimension != 2)
    throw ConfigError("grid dimension must be 1 or 2");
  if (spec.points_per_axis < 8)
    throw ConfigError("grid needs at least 8 nodes per axis");
  if (!(spec.box_halfwidth > 0.0) || !(spec.omega_halfwidth > 0.0) ||
      spec.omega_halfwidth >= spec.box_halfwidth)
    throw ConfigError("domain must lie strictly inside the truncation box");

  SpatialGrid g;
  g.spec = spec;
  const int m = spec.points_per_axis;
  const double R = spec.box_halfwidth;
  g.spacing = 2.0 * R / (m - 1);
  const double a = spec.omega_halfwidth;

  const int total = spec.dimension == 1 ? m : m * m;
  g.coords.resize(total);
  g.omega.assign(total, false);
  for (int idx = 0; idx < total; ++idx) {
    const int i = idx % m;
    const int j = idx / m;
    g.coords[idx] = {-R + i * g.spacing, spec.dimension == 2 ? -R + j * g.spacing : 0.0};
    bool inside = std::abs(g.coords[idx][0]) < a;
    if (spec.dimension == 2) inside = inside && std::abs(g.coords[idx][1]) < a;
    g.omega[idx] = inside;
    if (inside) g.omega_nodes.push_back(idx);
  }
  if (g.omega_nodes.empty()) throw ConfigError("domain contains no grid nodes");

  for (const auto& w : spec.windows) {
    if (!(w.lower < w.upper) || w.lower < -R || w.upper > R)
      throw ConfigError("window '" + w.name + "' must be a nonempty interval inside the box");
    Mask mask(total, false);
    int count = 0;
    for (int idx = 0; idx < total; ++idx) {
      const auto& x = g.coords[idx];
      bool in = x[0] > w.lower && x[0] < w.upper;
      if (spec.dimension == 2) in = in && std::abs(x[1]) < w.transverse;
      if (in && g.omega[idx]) {
        std::ostringstream msg;
        msg << "window '" << w.name << "' intersects the domain";
        throw ConfigError(msg.str());
      }
      mask[idx] = in;
      count += in ? 1 : 0;
    }
    if (count == 0) throw ConfigError("window '" + w.name + "' contains no grid nodes");
    if (w.upper > -a && w.lower < a) throw ConfigError("window '" + w.name + "' overlaps the domain closure");
    g.windows[w.name] = std::move(mask);
  }
  return g;
}

double inner(const SpatialGrid& grid, const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ShapeError("inner: size mismatch");
  return grid.cell_volume() * a.dot(b);
}

}  // namespace nlwave
