#include "nlwave/time_pairing.hpp"

#include "nlwave/errors.hpp"

namespace nlwave {

TimeRule parse_time_rule(const std::string& name) {
  if (name == "trapezoid") return TimeRule::trapezoid;
  if (name == "scheme") return TimeRule::scheme;
  throw ConfigError("unknown time rule '" + name + "' (expected trapezoid or scheme)");
}

std::string to_string(TimeRule rule) { return rule == TimeRule::trapezoid ? "trapezoid" : "scheme"; }

Mat interval_average(const Mat& a) {
  const Eigen::Index n = a.cols() - 1;
  if (n < 1) return Mat(a.rows(), 0);
  return 0.5 * (a.leftCols(n) + a.rightCols(n));
}

Mat interval_difference(const Mat& a, double dt) {
  const Eigen::Index n = a.cols() - 1;
  if (n < 1) return Mat(a.rows(), 0);
  return (a.rightCols(n) - a.leftCols(n)) / dt;
}

Mat time_reverse(const Mat& a) { return a.rowwise().reverse(); }

double time_pair(const Mat& a, const Mat& b, double dt, double cell_volume, TimeRule rule) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("time_pair: field shapes differ");
  if (a.cols() < 2) return 0.0;
  if (rule == TimeRule::scheme) return interval_pair(interval_average(a), interval_average(b), dt, cell_volume);
  const Eigen::Index last = a.cols() - 1;
  double acc = 0.5 * (a.col(0).dot(b.col(0)) + a.col(last).dot(b.col(last)));
  for (Eigen::Index k = 1; k < last; ++k) acc += a.col(k).dot(b.col(k));
  return dt * cell_volume * acc;
}

double interval_pair(const Mat& a, const Mat& b, double dt, double cell_volume) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("interval_pair: field shapes differ");
  return dt * cell_volume * a.cwiseProduct(b).sum();
}

}  // namespace nlwave
