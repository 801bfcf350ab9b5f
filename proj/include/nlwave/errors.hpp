#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nlwave {

/// Exponent or parameter outside its admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid experiment, grid, or data configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions do not match the grid.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Normal equations or probe systems too ill-conditioned to solve as posed.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal invariant broken (e.g. singular midpoint matrix).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Picard iteration failed to contract; carries the weighted gap history.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<double> gaps)
      : std::runtime_error(what), gaps_(std::move(gaps)) {}
  const std::vector<double>& gaps() const { return gaps_; }

 private:
  std::vector<double> gaps_;
};

/// Amplitude scan left with too few usable amplitudes.
class ScanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Module failure inside a running experiment, with the pipeline stage prepended.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlwave
