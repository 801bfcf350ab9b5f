#include "nlwave/coeffs.hpp"

#include "nlwave/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nlwave {

namespace {

constexpr double kTie = 1e-12;

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Coefficients Coefficients::zero(const SpatialGrid& grid) {
  Coefficients c;
  c.gamma = Vec::Zero(grid.node_count());
  c.q = Vec::Zero(grid.omega_count());
  return c;
}

bool ValidationReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) os << (c.pass ? "[pass] " : "[fail] ") << c.name << ": " << c.detail << "\n";
  return os.str();
}

ValidationReport validate_exponents(int dimension, double s, double p, double r) {
  ValidationReport report;
  const double n = dimension;
  const double two_s = 2.0 * s;

  ConstraintCheck pc{"p window", false, ""};
  if (two_s < n - kTie) {
    pc.pass = p >= n / s - kTie;
    pc.detail = "2s < n requires n/s = " + fmt_num(n / s) + " <= p <= inf, got p = " + fmt_num(p);
  } else if (std::abs(two_s - n) <= kTie) {
    pc.pass = p > 2.0;
    pc.detail = "2s = n requires 2 < p <= inf, got p = " + fmt_num(p);
  } else {
    pc.pass = p >= 2.0;
    pc.detail = "2s > n requires 2 <= p <= inf, got p = " + fmt_num(p);
  }
  report.checks.push_back(pc);

  ConstraintCheck rc{"r window", false, ""};
  if (two_s >= n - kTie) {
    rc.pass = r >= 0.0 && std::isfinite(r);
    rc.detail = "2s >= n requires 0 <= r < inf, got r = " + fmt_num(r);
  } else {
    const double cap = two_s / (n - two_s);
    rc.pass = r >= 0.0 && r <= cap + kTie;
    rc.detail = "2s < n requires 0 <= r <= 2s/(n-2s) = " + fmt_num(cap) + ", got r = " + fmt_num(r);
  }
  report.checks.push_back(rc);
  return report;
}

void validate_coefficients(const Coefficients& coeffs, const SpatialGrid& grid, double s) {
  if (coeffs.gamma.size() != grid.node_count()) throw ShapeError("gamma must be a full-grid vector");
  if (coeffs.q.size() != grid.omega_count()) throw ShapeError("q must be an Omega vector");
  if (!(coeffs.alpha > s && coeffs.alpha <= 1.0))
    throw DomainError("Hoelder exponent alpha must satisfy s < alpha <= 1");
  const auto report = validate_exponents(grid.dimension(), s, coeffs.p_exponent, 0.0);
  if (!report.checks.front().pass) throw DomainError(report.checks.front().detail);
  if (!coeffs.gamma.allFinite() || !coeffs.q.allFinite()) throw DomainError("coefficients must be finite");
}

Vec eval_nonlinearity(const Nonlinearity& f, const Vec& u) {
  if (u.size() != f.qf.size()) throw ShapeError("nonlinearity: vector length does not match q_f");
  Vec out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = f.qf[i] * std::pow(std::abs(u[i]), f.r) * u[i];
  return out;
}

Vec eval_antiderivative(const Nonlinearity& f, const Vec& u) {
  if (u.size() != f.qf.size()) throw ShapeError("antiderivative: vector length does not match q_f");
  Vec out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = f.qf[i] * std::pow(std::abs(u[i]), f.r + 2.0) / (f.r + 2.0);
  return out;
}

void validate_nonlinearity(const Nonlinearity& f, int dimension, double s) {
  if (f.qf.size() > 0 && f.qf.minCoeff() < 0.0) throw DomainError("nonlinearity coefficient q_f must be nonnegative");
  const auto report = validate_exponents(dimension, s, std::numeric_limits<double>::infinity(), f.r);
  if (!report.checks.back().pass) throw DomainError(report.checks.back().detail);
}

FieldPreset::Kind parse_preset_kind(const std::string& name) {
  if (name == "constant") return FieldPreset::Kind::constant;
  if (name == "gaussian") return FieldPreset::Kind::gaussian;
  if (name == "step") return FieldPreset::Kind::step;
  throw ConfigError("unknown field preset '" + name + "' (expected constant, gaussian, step)");
}

Vec evaluate_preset(const FieldPreset& preset, const SpatialGrid& grid) {
  Vec out(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) {
    const auto& x = grid.coords[i];
    double shape = 1.0;
    switch (preset.kind) {
      case FieldPreset::Kind::constant:
        shape = 1.0;
        break;
      case FieldPreset::Kind::gaussian: {
        double r2 = (x[0] - preset.center) * (x[0] - preset.center);
        if (grid.dimension() == 2) r2 += x[1] * x[1];
        shape = std::exp(-0.5 * r2 / (preset.width * preset.width));
        break;
      }
      case FieldPreset::Kind::step:
        shape = 0.5 * (1.0 + std::tanh((x[0] - preset.center) / preset.width));
        break;
    }
    out[i] = preset.base + preset.amplitude * shape;
  }
  return out;
}

Vec load_field_csv(const std::string& path, const SpatialGrid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file '" + path + "'");
  Vec out = Vec::Zero(grid.node_count());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string idx_s, val_s;
    if (!std::getline(row, idx_s, ',') || !std::getline(row, val_s)) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'node,value'");
    }
    try {
      const int idx = std::stoi(idx_s);
      if (idx < 0 || idx >= grid.node_count())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": node index out of range");
      out[idx] = std::stod(val_s);
    } catch (const std::invalid_argument&) {
      if (lineno == 1) continue;  // header
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

}  // namespace nlwave
