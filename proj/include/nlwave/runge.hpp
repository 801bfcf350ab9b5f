#pragma once

#include "nlwave/forward.hpp"

#include <random>
#include <string>
#include <vector>

namespace nlwave {

/// Exterior bump family with cached interior responses r_k = (u_{beta_k} - beta_k)|_Omega.
class RungeBasis {
 public:
  static RungeBasis compute(const FractionalOperator& op, const Coefficients& coeffs,
                            std::vector<BumpElement> elements, const TimeGrid& tg);

  std::size_t size() const { return elements_.size(); }
  const std::vector<BumpElement>& elements() const { return elements_; }
  const std::vector<Mat>& responses() const { return responses_; }
  const TimeGrid& time_grid() const { return tg_; }
  const FractionalOperator& op() const { return op_; }

  /// Gram matrix of the first `count` responses in the L2(0,T; H^s) pairing.
  Mat gram(std::size_t count) const;
  /// Pairings of the first `count` responses with a target.
  Vec project(const Mat& target, std::size_t count) const;
  /// sum_k c_k r_k over the leading coefficients.
  Mat combine(const Vec& c) const;
  /// sum_k c_k beta_k as exterior data.
  ExteriorData control(const Vec& c) const;

  /// Discrete L2(0,T; H^s) inner product of interior fields (trapezoid in time).
  double pair(const Mat& a, const Mat& b) const;

 private:
  RungeBasis(const FractionalOperator& op, const TimeGrid& tg) : op_(op), tg_(tg) {}
  FractionalOperator op_;
  TimeGrid tg_;
  std::vector<BumpElement> elements_;
  std::vector<Mat> responses_;
};

struct ControlFit {
  Vec coefficients;
  double residual = 0.0;           // ||sum c_k r_k - Phi||
  double relative_residual = 0.0;  // residual / ||Phi|| (0 for a zero target)
  double alpha = 0.0;
  double gram_condition = 0.0;
  double normal_equation_defect = 0.0;  // ||(G + alpha I)c - rhs|| / ||rhs||
  std::string hash;
};

/// Regularized least squares over the first `count` basis elements (all when 0).
/// alpha < 0 selects the default 1e-8 trace(G)/size. alpha = 0 with a
/// numerically singular Gram matrix throws IllConditionedError.
ControlFit fit_control(const RungeBasis& basis, const Mat& target, double alpha = -1.0, std::size_t count = 0);

enum class EndConditions { enforce, bypass };

/// |int <d/dt (u_c - phi_c), Psi> - int <d/dt Phi, Psi>| with interval
/// differences paired against interval averages. With `enforce`, Psi must
/// satisfy Psi(T) = Phi(0) = 0 or Psi(T) = Psi(0) = 0; otherwise ConfigError.
double verify_time_derivative_limit(const RungeBasis& basis, const ControlFit& fit, const Mat& target,
                                    const Mat& test, EndConditions policy = EndConditions::enforce);

/// Seeded test fields sum_{k,l<3} a_kl sin((k+1) pi (x+a)/(2a)) theta_l(t) with
/// a_kl ~ N(0, 1). theta_l = sin((l+1) pi t/T) vanishes at both ends; with
/// `vanishing_ends` false, theta_l = cos(l pi t/T) violates them.
std::vector<Mat> random_test_suite(const SpatialGrid& grid, const TimeGrid& tg, int count, std::mt19937_64& rng,
                                   bool vanishing_ends = true);

/// Residuals and worst-case derivative-pairing defects over nested fits.
struct DecayStudy {
  std::vector<std::size_t> sizes;
  std::vector<double> residuals;  // relative Runge residual per size
  std::vector<double> defects;    // max_m defect / ||Psi_m|| per size
  std::vector<std::string> hashes;
  double pearson = 0.0;           // correlation of residuals with defects
};

DecayStudy runge_decay_study(const RungeBasis& basis, const Mat& target, const std::vector<std::size_t>& sizes,
                             const std::vector<Mat>& suite, EndConditions policy = EndConditions::enforce,
                             double alpha = -1.0);

/// Pearson correlation coefficient; 0 when either sample is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace nlwave
