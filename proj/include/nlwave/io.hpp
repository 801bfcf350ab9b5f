#pragma once

#include "nlwave/coeffs.hpp"
#include "nlwave/forward.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nlwave {

/// 64-bit FNV-1a over raw bytes, chainable through `basis`.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t hash_vector(const Vec& v, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex(std::uint64_t h);
/// Hash of (gamma, q); identifies a coefficient set in manifests.
std::string coefficients_hash(const Coefficients& c);

/// Shortest round-trip text form (%.17g).
std::string format_double(double v);

/// Plain CSV table writer; numbers are written with format_double.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& row);
  void write(const std::string& path) const;
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

void write_matrix_csv(const std::string& path, const Mat& m);
Mat read_matrix_csv(const std::string& path);

/// Long-format CSV: time, node, u, v.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
/// Compact little-endian dump: magic, rows, cols, times, u, v.
void write_trajectory_binary(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_binary(const std::string& path);

}  // namespace nlwave
