#pragma once

#include "nlwave/grid.hpp"

#include <string>

namespace nlwave {

/// Time quadrature for space-time pairings of node-sampled fields.
///   trapezoid: dt * sum_k w_k <a_k, b_k> with end weights 1/2.
///   scheme:    dt * sum_n <abar_n, bbar_n> over interval midpoint averages.
/// The second is the pairing under which the midpoint scheme's discrete
/// identities close exactly.
enum class TimeRule { trapezoid, scheme };

TimeRule parse_time_rule(const std::string& name);
std::string to_string(TimeRule rule);

// Space-time fields are stored column per instant: rows are nodes, cols are t_0..t_N.

/// Interval averages (a_n + a_{n+1})/2, N columns.
Mat interval_average(const Mat& a);
/// Interval differences (a_{n+1} - a_n)/dt, N columns.
Mat interval_difference(const Mat& a, double dt);
/// Column order reversed: a*(t_k) = a(t_{N-k}).
Mat time_reverse(const Mat& a);

/// Space-time pairing with spatial weight `cell_volume`.
double time_pair(const Mat& a, const Mat& b, double dt, double cell_volume, TimeRule rule);
/// Same, but with per-interval factors already formed (N columns each).
double interval_pair(const Mat& a, const Mat& b, double dt, double cell_volume);

}  // namespace nlwave
