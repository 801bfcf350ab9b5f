#include "nlwave/runge.hpp"

#include "nlwave/errors.hpp"
#include "nlwave/io.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace nlwave {

namespace {

bool vanishes(const Vec& v, double scale) { return v.cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1e-300); }

}  // namespace

RungeBasis RungeBasis::compute(const FractionalOperator& op, const Coefficients& coeffs,
                               std::vector<BumpElement> elements, const TimeGrid& tg) {
  RungeBasis basis(op, tg);
  const SpatialGrid& grid = op.grid();
  if (!elements.empty()) {
    const std::string& window = elements.front().window;
    for (const auto& e : elements)
      if (e.window != window) throw ConfigError("Runge basis must live in a single exterior window");
  }
  basis.responses_.reserve(elements.size());
  for (const auto& e : elements) {
    const ExteriorData beta = ExteriorData::single(e);
    validate_compatibility(beta);
    basis.responses_.push_back(solve_inhomogeneous(op, coeffs, Source(), beta, tg).u_omega(grid));
  }
  basis.elements_ = std::move(elements);
  return basis;
}

double RungeBasis::pair(const Mat& a, const Mat& b) const {
  const Mat Ab = op_.interior_block() * b;
  return time_pair(a, Ab, tg_.dt(), op_.grid().cell_volume(), TimeRule::trapezoid);
}

Mat RungeBasis::gram(std::size_t count) const {
  Mat G(count, count);
  std::vector<Mat> images;
  images.reserve(count);
  for (std::size_t k = 0; k < count; ++k) images.push_back(op_.interior_block() * responses_[k]);
  const double dt = tg_.dt(), h = op_.grid().cell_volume();
  for (std::size_t j = 0; j < count; ++j)
    for (std::size_t k = 0; k <= j; ++k)
      G(j, k) = G(k, j) = time_pair(responses_[j], images[k], dt, h, TimeRule::trapezoid);
  return G;
}

Vec RungeBasis::project(const Mat& target, std::size_t count) const {
  const Mat At = op_.interior_block() * target;
  Vec out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = time_pair(responses_[k], At, tg_.dt(), op_.grid().cell_volume(), TimeRule::trapezoid);
  return out;
}

Mat RungeBasis::combine(const Vec& c) const {
  Mat out = Mat::Zero(op_.grid().omega_count(), tg_.instants());
  for (Eigen::Index k = 0; k < c.size(); ++k) out += c[k] * responses_[k];
  return out;
}

ExteriorData RungeBasis::control(const Vec& c) const {
  ExteriorData out;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    out.elements.push_back(elements_[k]);
    out.coefficients.push_back(c[k]);
  }
  return out;
}

ControlFit fit_control(const RungeBasis& basis, const Mat& target, double alpha, std::size_t count) {
  const SpatialGrid& grid = basis.op().grid();
  if (target.rows() != grid.omega_count() || target.cols() != basis.time_grid().instants())
    throw ShapeError("Runge target must have Omega rows and one column per instant");
  if (count == 0 || count > basis.size()) count = basis.size();

  const Mat G = basis.gram(count);
  const Vec rhs = basis.project(target, count);
  Eigen::SelfAdjointEigenSolver<Mat> eig(G);
  const Vec lam = eig.eigenvalues();
  const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
  const double lmin = lam.size() ? lam.minCoeff() : 0.0;

  ControlFit fit;
  fit.alpha = alpha < 0.0 ? 1e-8 * G.trace() / std::max<std::size_t>(count, 1) : alpha;
  fit.gram_condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (fit.alpha == 0.0 && !(lmin > 1e-14 * lmax))
    throw IllConditionedError("Gram matrix is numerically rank deficient; use a regularization alpha > 0");

  const Vec shifted = (lam.array() + fit.alpha).matrix();
  fit.coefficients = eig.eigenvectors() * (eig.eigenvectors().transpose() * rhs).cwiseQuotient(shifted);
  const Vec normal_defect = G * fit.coefficients + fit.alpha * fit.coefficients - rhs;
  fit.normal_equation_defect = rhs.norm() > 0.0 ? normal_defect.norm() / rhs.norm() : normal_defect.norm();

  const Mat err = basis.combine(fit.coefficients) - target;
  fit.residual = std::sqrt(std::max(0.0, basis.pair(err, err)));
  const double tnorm = std::sqrt(std::max(0.0, basis.pair(target, target)));
  fit.relative_residual = tnorm > 0.0 ? fit.residual / tnorm : 0.0;
  fit.hash = hex(hash_vector(fit.coefficients, hash_vector(Eigen::Map<const Vec>(target.data(), target.size()))));
  return fit;
}

double verify_time_derivative_limit(const RungeBasis& basis, const ControlFit& fit, const Mat& target,
                                    const Mat& test, EndConditions policy) {
  const SpatialGrid& grid = basis.op().grid();
  const TimeGrid& tg = basis.time_grid();
  if (test.rows() != grid.omega_count() || test.cols() != tg.instants() || target.rows() != test.rows() ||
      target.cols() != test.cols())
    throw ShapeError("time-derivative check: fields must share the Omega x instants shape");

  if (policy == EndConditions::enforce) {
    const double ts = test.cwiseAbs().maxCoeff();
    const double ps = target.cwiseAbs().maxCoeff();
    const bool end_T = vanishes(test.col(tg.n_steps), ts);
    const bool cond_a = end_T && vanishes(target.col(0), ps);
    const bool cond_b = end_T && vanishes(test.col(0), ts);
    if (ts > 0.0 && !cond_a && !cond_b)
      throw ConfigError("test field violates both end conditions: need Psi(T) = Phi(0) = 0 or Psi(T) = Psi(0) = 0");
  }

  const Mat err = basis.combine(fit.coefficients) - target;
  return std::abs(
      interval_pair(interval_difference(err, tg.dt()), interval_average(test), tg.dt(), grid.cell_volume()));
}

std::vector<Mat> random_test_suite(const SpatialGrid& grid, const TimeGrid& tg, int count, std::mt19937_64& rng,
                                   bool vanishing_ends) {
  std::normal_distribution<double> normal;
  const double a = grid.spec.omega_halfwidth;
  const double pi = std::acos(-1.0);
  std::vector<Mat> out;
  for (int m = 0; m < count; ++m) {
    Mat coef(3, 3);
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) coef(k, l) = normal(rng);
    Mat space(grid.omega_count(), 3), time(tg.instants(), 3);
    for (int j = 0; j < grid.omega_count(); ++j)
      for (int k = 0; k < 3; ++k) space(j, k) = std::sin((k + 1) * pi * (grid.coords[grid.omega_nodes[j]][0] + a) / (2 * a));
    for (int n = 0; n < tg.instants(); ++n)
      for (int l = 0; l < 3; ++l) {
        const double z = tg.time(n) / tg.T;
        time(n, l) = vanishing_ends ? std::sin((l + 1) * pi * z) : std::cos(l * pi * z);
      }
    out.push_back(space * coef * time.transpose());
  }
  return out;
}

DecayStudy runge_decay_study(const RungeBasis& basis, const Mat& target, const std::vector<std::size_t>& sizes,
                             const std::vector<Mat>& suite, EndConditions policy, double alpha) {
  DecayStudy study;
  study.sizes = sizes;
  for (std::size_t n : sizes) {
    if (n == 0 || n > basis.size()) throw ConfigError("fit size " + std::to_string(n) + " outside the basis");
    const ControlFit fit = fit_control(basis, target, alpha, n);
    double worst = 0.0;
    for (const Mat& psi : suite) {
      const double norm = psi.norm();
      if (norm > 0.0) worst = std::max(worst, verify_time_derivative_limit(basis, fit, target, psi, policy) / norm);
    }
    study.residuals.push_back(fit.relative_residual);
    study.defects.push_back(worst);
    study.hashes.push_back(fit.hash);
  }
  study.pearson = pearson(study.residuals, study.defects);
  return study;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ShapeError("pearson needs two samples of equal length >= 2");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

}  // namespace nlwave
