#include "nlwave/io.hpp"

#include "nlwave/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nlwave {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'W', 'T', 'R', 'J', '0', '1'};

void write_block(std::ofstream& out, const Mat& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t basis) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = basis;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_vector(const Vec& v, std::uint64_t basis) {
  return fnv1a(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()), basis);
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string coefficients_hash(const Coefficients& c) { return hex(hash_vector(c.q, hash_vector(c.gamma))); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw ShapeError("csv row width does not match header");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < header_.size(); ++k) os << (k ? "," : "") << header_[k];
  os << "\n";
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format_double(row[k]);
    os << "\n";
  }
  return os.str();
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << str();
}

void write_matrix_csv(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
}

Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError(path + ": ragged matrix csv");
    rows.push_back(std::move(row));
  }
  Mat m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "time,node,u,v\n";
  for (Eigen::Index k = 0; k < traj.u.cols(); ++k)
    for (Eigen::Index i = 0; i < traj.u.rows(); ++i)
      out << format_double(traj.times[k]) << "," << i << "," << format_double(traj.u(i, k)) << ","
          << format_double(traj.v(i, k)) << "\n";
}

void write_trajectory_binary(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(kMagic, sizeof kMagic);
  const std::int64_t dims[2] = {traj.u.rows(), traj.u.cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(traj.times.data()),
            static_cast<std::streamsize>(sizeof(double) * traj.times.size()));
  write_block(out, traj.u);
  write_block(out, traj.v);
}

Trajectory read_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8)) throw ConfigError(path + ": not a trajectory dump");
  std::int64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  Trajectory traj;
  traj.times.resize(dims[1]);
  traj.u.resize(dims[0], dims[1]);
  traj.v.resize(dims[0], dims[1]);
  in.read(reinterpret_cast<char*>(traj.times.data()), static_cast<std::streamsize>(sizeof(double) * dims[1]));
  in.read(reinterpret_cast<char*>(traj.u.data()), static_cast<std::streamsize>(sizeof(double) * traj.u.size()));
  in.read(reinterpret_cast<char*>(traj.v.data()), static_cast<std::streamsize>(sizeof(double) * traj.v.size()));
  if (!in) throw ConfigError(path + ": truncated trajectory dump");
  return traj;
}

}  // namespace nlwave
