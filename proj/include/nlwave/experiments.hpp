#pragma once

#include "nlwave/config.hpp"
#include "nlwave/invert.hpp"

#include <string>
#include <vector>

namespace nlwave {

inline constexpr const char* kVersion = "0.1.0";

/// One invariant outcome. `relation` is "<=", ">=", "==" or "record"
/// (recorded value with no pass criterion).
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation = "<=";
  bool pass = true;
  std::string note;
};

/// Plot-ready (x, y[, group]) data.
struct Series {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> group;  // empty for two-column series
  std::string comment;             // written as a leading '#' line
};

struct RunSummary {
  std::string manifest_path;
  bool pass = false;
  std::vector<Check> checks;
};

/// Runs the pipeline named by the config and writes manifest.json plus CSV
/// tables into `out_dir`. With `check_only`, tables and series are skipped.
/// Setup failures raise ConfigError; module failures raise PipelineError after
/// a manifest flagged incomplete has been written.
RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir, bool check_only = false);

/// Writes series `name` of a finished run as CSV and returns its path
/// (default: plot_<name>.csv next to the manifest). Unknown names raise
/// ConfigError listing the available series.
std::string emit_plot_data(const std::string& manifest_path, const std::string& name,
                           const std::string& out_path = "");

/// Objects shared by every pipeline, built from the config.
struct Setup {
  SpatialGrid grid;
  FractionalOperator op;
  TimeGrid tg;
  Coefficients coeffs;
};

/// Throws ConfigError (with the offending field) on any invalid setting.
Setup build_setup(const ExperimentConfig& config);

/// The four-bump spatial family in W1 used by Runge and inversion bases, and
/// its mirror image in W2.
std::vector<SpaceBump> default_spatial_family(const std::string& window);

/// Small separable bases for the DN checks, `size` elements per window.
std::pair<std::vector<BumpElement>, std::vector<BumpElement>> dn_bases(int size, double T);

}  // namespace nlwave
