#include "nlwave/experiments.hpp"

#include "nlwave/errors.hpp"
#include "nlwave/io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace nlwave {

namespace {

// Collects outputs in memory; everything is written once by finish().
class Recorder {
 public:
  Recorder(const ExperimentConfig& config, std::string dir, bool check_only)
      : config_(config), dir_(std::move(dir)), check_only_(check_only) {}

  void tolerance(const std::string& name, double value) { tolerances_[name] = value; }

  void check(const std::string& name, double value, double tol, const std::string& relation,
             const std::string& note = "") {
    Check c{name, value, tol, relation, true, note};
    // Every threshold lands in the manifest, including derived ones.
    tolerances_[name] = tol;
    if (relation == "<=")
      c.pass = value <= tol;
    else if (relation == ">=")
      c.pass = value >= tol;
    else if (relation == "<")
      c.pass = value < tol;
    else if (relation == "==")
      c.pass = value == tol;
    checks_.push_back(c);
  }
  void record(const std::string& name, double value, const std::string& note = "") {
    checks_.push_back({name, value, 0.0, "record", true, note});
  }

  void table(const std::string& name, std::string content) { tables_[name] = std::move(content); }
  void series(Series s) { series_.push_back(std::move(s)); }
  void writer(const std::string& name, std::function<void(const std::string&)> w) {
    writers_.emplace_back(name, std::move(w));
  }
  json& results() { return results_; }

  RunSummary finish(bool complete, const std::string& error) {
    fs::create_directories(dir_);
    json manifest;
    manifest["tool"] = "nlwave";
    manifest["version"] = kVersion;
    manifest["modules"] = {{"operator", kVersion}, {"coeffs", kVersion}, {"forward", kVersion},
                           {"dnmap", kVersion},    {"runge", kVersion},  {"invert", kVersion},
                           {"cli_experiments", kVersion}};
    manifest["libraries"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                      std::to_string(BOOST_VERSION % 100)}};
    manifest["kind"] = to_string(config_.kind());
    manifest["seed"] = config_.seed();
    manifest["created"] = timestamp();
    manifest["check_only"] = check_only_;
    manifest["config"] = config_.resolved();
    manifest["tolerances"] = tolerances_;

    bool pass = complete;
    json checks = json::array();
    for (const auto& c : checks_) {
      pass = pass && c.pass;
      json j = {{"name", c.name}, {"value", c.value}, {"relation", c.relation}};
      if (c.relation != "record") j["tolerance"] = c.tolerance;
      j["pass"] = c.pass;
      if (!c.note.empty()) j["note"] = c.note;
      checks.push_back(j);
    }
    manifest["checks"] = checks;

    json tables = json::array(), series = json::object();
    if (!check_only_) {
      for (const auto& [name, content] : tables_) {
        write_text(dir_ + "/" + name + ".csv", content);
        tables.push_back(name + ".csv");
      }
      for (const auto& [name, w] : writers_) {
        w(dir_);
        tables.push_back(name);
      }
      for (const auto& s : series_) {
        const std::string file = "series_" + s.name + ".csv";
        write_text(dir_ + "/" + file, series_csv(s));
        json cols = {s.x_label, s.y_label};
        if (!s.group.empty()) cols.push_back("group");
        series[s.name] = {{"file", file}, {"columns", cols}, {"comment", s.comment}};
      }
    }
    manifest["tables"] = tables;
    manifest["series"] = series;
    manifest["results"] = results_;
    manifest["complete"] = complete;
    if (!error.empty()) manifest["error"] = error;
    manifest["status"] = !complete ? "incomplete" : pass ? "pass" : "fail";

    const std::string path = dir_ + "/manifest.json";
    write_text(path, manifest.dump(2) + "\n");
    return {path, pass, checks_};
  }

  static std::string series_csv(const Series& s) {
    std::string out = s.x_label + "," + s.y_label + (s.group.empty() ? "" : ",group") + "\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out += format_double(s.x[i]) + "," + format_double(s.y[i]);
      if (!s.group.empty()) out += "," + s.group[i];
      out += "\n";
    }
    return out;
  }

  static void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
  }

 private:
  static std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
  }

  const ExperimentConfig& config_;
  std::string dir_;
  bool check_only_;
  std::map<std::string, double> tolerances_;
  std::vector<Check> checks_;
  std::map<std::string, std::string> tables_;
  std::vector<Series> series_;
  std::vector<std::pair<std::string, std::function<void(const std::string&)>>> writers_;
  json results_ = json::object();
};

Vec field_from(const ExperimentConfig& cfg, const std::string& section, const SpatialGrid& grid) {
  if (cfg.has(section, "file") && !cfg.text(section, "file").empty())
    return load_field_csv(cfg.text(section, "file"), grid);
  FieldPreset p;
  p.kind = parse_preset_kind(cfg.text(section, "preset"));
  p.base = cfg.has(section, "base") ? cfg.number(section, "base") : 0.0;
  p.amplitude = cfg.number(section, "amplitude");
  p.center = cfg.number(section, "center");
  p.width = cfg.number(section, "width");
  if (!(p.width > 0.0)) throw ConfigError("[" + section + "] width must be positive");
  return evaluate_preset(p, grid);
}

Vec omega_coords(const SpatialGrid& grid) {
  Vec x(grid.omega_count());
  for (int j = 0; j < grid.omega_count(); ++j) x[j] = grid.coords[grid.omega_nodes[j]][0];
  return x;
}

Mat interior_field(const SpatialGrid& grid, const TimeGrid& tg, const std::function<double(double, double)>& f) {
  Mat out(grid.omega_count(), tg.instants());
  for (int k = 0; k < tg.instants(); ++k)
    for (int j = 0; j < grid.omega_count(); ++j) out(j, k) = f(grid.coords[grid.omega_nodes[j]][0], tg.time(k));
  return out;
}

double sup_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ExteriorData configured_exterior(const ExperimentConfig& cfg, const TimeGrid& tg) {
  const double amp = cfg.number("exterior", "amplitude");
  if (amp == 0.0) return {};
  BumpElement e;
  e.window = cfg.text("exterior", "window");
  e.space.center = {cfg.number("exterior", "center"), 0.0};
  e.space.halfwidth = {cfg.number("exterior", "halfwidth"), 1.0};
  const double tc = cfg.number("exterior", "t_center"), tw = cfg.number("exterior", "t_halfwidth");
  e.time = {tc < 0.0 ? 0.5 * tg.T : tc, tw < 0.0 ? 0.5 * tg.T : tw};
  return ExteriorData::single(e, amp);
}

std::string csv_of(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  CsvTable t(header);
  for (const auto& r : rows) t.add_row(r);
  return t.str();
}

double relative(double defect, double scale) { return scale > 0.0 ? defect / scale : defect; }

// ---------------------------------------------------------------- pipelines

void run_forward(const ExperimentConfig& cfg, const Setup& s, Recorder& rec, std::mt19937_64& rng) {
  const SpatialGrid& g = s.grid;
  const double a = g.spec.omega_halfwidth;
  const double pi = std::numbers::pi;
  Vec u0(g.omega_count()), u1(g.omega_count());
  for (int j = 0; j < g.omega_count(); ++j) {
    const double x = g.coords[g.omega_nodes[j]][0];
    u0[j] = cfg.number("initial", "displacement") * std::sin(pi * (x + a) / (2 * a));
    u1[j] = cfg.number("initial", "velocity") * std::sin(2 * pi * (x + a) / (2 * a));
  }
  Source F;
  if (const double amp = cfg.number("source", "amplitude"); amp != 0.0)
    F = amp * random_smooth_source(g, s.tg, rng, cfg.integer("source", "modes"));
  const ExteriorData ext = configured_exterior(cfg, s.tg);

  const Trajectory traj = ext.empty()
                              ? solve_homogeneous(s.op, s.coeffs, F, u0, u1, s.tg)
                              : solve_inhomogeneous(s.op, s.coeffs, F, ext, g.extend_from_omega(u0),
                                                    g.extend_from_omega(u1), s.tg);
  const Vec E = discrete_energy(s.op, traj);
  rec.record("max_abs_u", sup_abs(traj.u));
  const double tol = cfg.number("tolerances", "energy");
  rec.tolerance("energy", tol);
  if (ext.empty()) {
    rec.record("gronwall_ratio", gronwall_ratio(s.op, traj, F, s.tg.dt()));
    const Vec res = energy_identity_residual(s.op, traj, s.coeffs, F, s.tg.dt(), TimeRule::scheme);
    rec.check("energy_identity_relative", relative(res.cwiseAbs().maxCoeff(), E.cwiseAbs().maxCoeff()), tol, "<=");
  } else {
    rec.results()["energy_identity"] = "skipped: exterior data feed energy in through the nonlocal flux";
  }

  std::vector<std::vector<double>> rows;
  Series energy{"energy", "t", "E", {}, {}, {}, "discrete energy ||v||^2 + ||A^{1/2} u||^2"};
  for (int k = 0; k < s.tg.instants(); ++k) {
    rows.push_back({s.tg.time(k), E[k]});
    energy.x.push_back(s.tg.time(k));
    energy.y.push_back(E[k]);
  }
  rec.table("energy", csv_of({"t", "E"}, rows));
  rec.series(std::move(energy));
  rec.writer("trajectory.csv", [traj](const std::string& dir) { write_trajectory_csv(dir + "/trajectory.csv", traj); });
}

void run_identities(const ExperimentConfig& cfg, const Setup& s, Recorder& rec, std::mt19937_64& rng) {
  const SpatialGrid& g = s.grid;
  const TimeGrid& tg = s.tg;
  const TimeRule rule = parse_time_rule(cfg.text("time", "rule"));
  const TimeGrid one = TimeGrid::make(1.0, 2);
  const Vec u0 = random_smooth_source(g, one, rng).col(1);
  const Vec u1 = random_smooth_source(g, one, rng).col(1);
  const Source F = random_smooth_source(g, tg, rng);
  std::vector<std::vector<double>> rows;
  auto add = [&](const std::string& name, double value, const std::string& tol_key) {
    const double tol = cfg.number("tolerances", tol_key);
    rec.tolerance(tol_key, tol);
    rec.check(name, value, tol, "<=");
    rows.push_back({static_cast<double>(rows.size()), value, tol, value <= tol ? 1.0 : 0.0});
  };

  // Energy identity under the scheme pairing.
  const Trajectory traj = solve_homogeneous(s.op, s.coeffs, F, u0, u1, tg);
  const Vec res = energy_identity_residual(s.op, traj, s.coeffs, F, tg.dt(), TimeRule::scheme);
  add("energy_identity_relative", relative(res.cwiseAbs().maxCoeff(), discrete_energy(s.op, traj).maxCoeff()),
      "energy");

  // Reversal: stepping the flipped-damping problem backward reproduces u.
  Coefficients flipped = s.coeffs;
  flipped.gamma = -s.coeffs.gamma;
  const Trajectory back = solve_backward(s.op, flipped, F, ExteriorData{}, traj.u.col(tg.n_steps),
                                         traj.v.col(tg.n_steps), tg);
  add("time_reversal_relative", relative(sup_abs(back.u - traj.u), sup_abs(traj.u)), "reversal");

  // Transposition duality with and without the damping boundary term.
  const TranspositionReport tr = verify_transposition(s.op, s.coeffs, u0, u1, F, tg, 8, rng);
  add("transposition_relative", tr.max_relative, "transposition");
  TranspositionOptions ablate;
  ablate.include_gamma_term = false;
  const TranspositionReport ta = verify_transposition(s.op, s.coeffs, u0, u1, F, tg, 8, rng, ablate);
  rec.record("transposition_gamma_ablation_relative", ta.max_relative,
             "control: dropping the damping boundary term; O(1) when gamma != 0");

  // DN self-adjointness and the integral identity.
  const auto [b1, b2] = dn_bases(cfg.integer("dn", "size"), tg.T);
  const AdjointnessDefect sa = check_self_adjointness(s.op, s.coeffs, b1, b2, tg, Reversal::star, rule);
  add("dn_self_adjointness_relative", relative(sa.defect, sa.scale), "adjointness");

  const ExteriorData phi1 = ExteriorData::single(b1.front());
  const ExteriorData phi2 = ExteriorData::single(b2.back());
  Coefficients cq = s.coeffs;
  cq.q += g.restrict_to_omega(field_from(cfg, "delta_q", g));
  const IdentityCheck iq = check_integral_identity(s.op, s.coeffs, cq, phi1, phi2, tg, rule);
  add("integral_identity_dq_relative", relative(iq.defect, std::max(std::abs(iq.lhs), std::abs(iq.rhs))), "integral");
  Coefficients cg = s.coeffs;
  cg.gamma += g.extend_from_omega(g.restrict_to_omega(field_from(cfg, "delta_gamma", g)));
  const IdentityCheck ig = check_integral_identity(s.op, s.coeffs, cg, phi1, phi2, tg, rule);
  add("integral_identity_dgamma_relative", relative(ig.defect, std::max(std::abs(ig.lhs), std::abs(ig.rhs))),
      "integral");

  rec.table("identities", csv_of({"index", "relative_defect", "tolerance", "pass"}, rows));
  rec.results()["identity_order"] = {"energy_identity", "time_reversal", "transposition", "dn_self_adjointness",
                                     "integral_identity_dq", "integral_identity_dgamma"};
}

void run_dn(const ExperimentConfig& cfg, const Setup& s, Recorder& rec) {
  const TimeRule rule = parse_time_rule(cfg.text("time", "rule"));
  const auto [b1, b2] = dn_bases(cfg.integer("dn", "size"), s.tg.T);
  const DNMatrix D = dn_matrix(s.op, s.coeffs, b1, b2, s.tg, Reversal::star, rule);
  const AdjointnessDefect sa = check_self_adjointness(s.op, s.coeffs, b1, b2, s.tg, Reversal::star, rule);
  const AdjointnessDefect sn = check_self_adjointness(s.op, s.coeffs, b1, b2, s.tg, Reversal::none, rule);
  const double tol = cfg.number("tolerances", "adjointness");
  rec.tolerance("adjointness", tol);
  rec.check("dn_self_adjointness_relative", relative(sa.defect, sa.scale), tol, "<=");
  rec.record("dn_self_adjointness_no_reversal_relative", relative(sn.defect, sn.scale),
             "control: pairing without time reversal");
  rec.writer("dn.csv", [D](const std::string& dir) { D.write(dir + "/dn.csv"); });
}

Mat runge_target(const std::string& name, const SpatialGrid& g, const TimeGrid& tg) {
  const double a = g.spec.omega_halfwidth, T = tg.T;
  const double pi = std::numbers::pi;
  if (name == "t1")
    return interior_field(g, tg, [&](double x, double t) {
      return (t / T) * (t / T) * std::sqrt(std::max(0.0, 1.0 - (x / a) * (x / a)));
    });
  if (name == "t2")
    return interior_field(g, tg, [&](double x, double t) {
      const double w = 1.0 - (x / a) * (x / a), st = std::sin(pi * t / T);
      return st * st * w * w;
    });
  throw ConfigError("[runge] target: expected t1 or t2, got '" + name + "'");
}

void run_runge(const ExperimentConfig& cfg, const Setup& s, Recorder& rec, std::mt19937_64& rng) {
  const SpatialGrid& g = s.grid;
  const std::vector<BumpElement> elements =
      tensor_family("W1", default_spatial_family("W1"), cfg.integer("runge", "time_bumps"), s.tg.T);
  const RungeBasis basis = RungeBasis::compute(s.op, s.coeffs, elements, s.tg);
  std::vector<std::size_t> sizes;
  for (double v : cfg.list("runge", "sizes")) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("[runge] sizes must be positive integers");
    sizes.push_back(static_cast<std::size_t>(v));
  }
  if (sizes.size() < 2) throw ConfigError("[runge] sizes needs at least two entries");
  const Mat target = runge_target(cfg.text("runge", "target"), g, s.tg);
  const int suite_size = cfg.integer("runge", "suite");
  const std::vector<Mat> suite = random_test_suite(g, s.tg, suite_size, rng, true);
  const std::vector<Mat> bad_suite = random_test_suite(g, s.tg, suite_size, rng, false);
  const double alpha = cfg.number("runge", "alpha");
  const DecayStudy study = runge_decay_study(basis, target, sizes, suite, EndConditions::enforce, alpha);
  const double pi = std::numbers::pi;
  const double a = g.spec.omega_halfwidth;
  const Mat offset = interior_field(g, s.tg, [&](double x, double t) {
    return (0.5 + (t / s.tg.T) * (t / s.tg.T)) * std::sqrt(std::max(0.0, 1.0 - (x / a) * (x / a)));
  });
  const DecayStudy control = runge_decay_study(basis, offset, sizes, bad_suite, EndConditions::bypass, alpha);
  (void)pi;

  double worst_ratio = 0.0;
  for (std::size_t k = 1; k < study.residuals.size(); ++k)
    worst_ratio = std::max(worst_ratio, study.residuals[k] / study.residuals[k - 1]);
  const double terminal_tol = cfg.number("tolerances", "runge_terminal");
  rec.tolerance("runge_terminal", terminal_tol);
  rec.tolerance("pearson", 0.9);
  rec.tolerance("control_shrink", 0.25);
  rec.check("runge_residual_max_step_ratio", worst_ratio, 1.0, "<", "strict decrease over nested bases");
  rec.check("runge_terminal_residual", study.residuals.back(), terminal_tol, "<=");
  rec.check("derivative_defect_pearson", study.pearson, 0.9, ">=");
  const double shrink = control.defects.back() / std::max(control.defects.front(), 1e-300);
  rec.check("control_defect_terminal_over_initial", shrink, 0.25, ">=",
            "negative control: end conditions violated, defect must not shrink with the residual");

  std::vector<std::vector<double>> rows;
  Series decay{"runge_decay", "basis_size", "relative_residual", {}, {}, {}, "target " + cfg.text("runge", "target")};
  json hashes = json::array();
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    rows.push_back({static_cast<double>(sizes[k]), study.residuals[k], study.defects[k], control.defects[k]});
    decay.x.push_back(static_cast<double>(sizes[k]));
    decay.y.push_back(study.residuals[k]);
    hashes.push_back(study.hashes[k]);
  }
  rec.table("runge", csv_of({"basis_size", "relative_residual", "derivative_defect", "control_defect"}, rows));
  rec.series(std::move(decay));
  rec.results()["fit_hashes"] = hashes;
}

json probes_json(const InversionResult& r) {
  json out = json::array();
  for (const auto& p : r.probes)
    out.push_back({{"role", p.role}, {"description", p.description}, {"fit_hash", p.fit_hash},
                   {"relative_residual", p.relative_residual}});
  return out;
}

json history_json(const InversionResult& r) {
  json out = json::array();
  for (const auto& h : r.history)
    out.push_back({{"ladder_index", h.chosen}, {"lambda", h.lambda}, {"misfit", h.misfit},
                   {"residual", h.residual}, {"seminorm", h.seminorm}});
  return out;
}

void run_invert_linear(const ExperimentConfig& cfg, const Setup& s, Recorder& rec) {
  const SpatialGrid& g = s.grid;
  const std::string field = cfg.text("invert", "field");
  if (field != "potential" && field != "damping" && field != "joint")
    throw ConfigError("[invert] field: expected potential, damping or joint, got '" + field + "'");

  LinearInversionOptions opt;
  opt.cells = cfg.integer("invert", "cells");
  opt.iterations = cfg.integer("invert", "iterations");
  opt.identity_weight = cfg.number("invert", "identity_weight");
  opt.runge_warn = cfg.number("invert", "runge_warn");
  if (const auto ladder = cfg.list("invert", "ladder"); !ladder.empty()) opt.ladder = ladder;
  const RecoveryMesh mesh = RecoveryMesh::make(g, opt.cells);

  const int nt = cfg.integer("invert", "time_bumps");
  const auto basis1 = tensor_family("W1", default_spatial_family("W1"), nt, s.tg.T);
  const auto basis2 = tensor_family("W2", default_spatial_family("W2"), nt, s.tg.T);

  // The twin's hidden coefficients; the inverter only sees the reference.
  const Vec dq = field != "damping" ? g.restrict_to_omega(field_from(cfg, "delta_q", g)) : Vec::Zero(g.omega_count());
  const Vec dg = field != "potential" ? g.restrict_to_omega(field_from(cfg, "delta_gamma", g))
                                      : Vec::Zero(g.omega_count());
  Coefficients hidden = s.coeffs;
  hidden.q += dq;
  hidden.gamma += g.extend_from_omega(dg);
  const SyntheticTwin twin(s.op, hidden);

  const double tol = cfg.number("tolerances", "inversion");
  const double floor = cfg.number("tolerances", "zero_floor");
  rec.tolerance("inversion", tol);
  rec.tolerance("zero_floor", floor);
  rec.tolerance("ablation_factor", 2.0);
  auto assess = [&](const std::string& name, const InversionResult& r, const Vec& truth) {
    const double err = relative_cell_error(mesh, r.cells, truth);
    if (truth.norm() > 0.0)
      rec.check(name + "_relative_error", err, tol, "<=");
    else
      rec.check(name + "_zero_difference_norm", err, floor, "<=", "identical coefficients: zero correction expected");
    rec.results()[name] = {{"relative_error", err}, {"cells", std::vector<double>(r.cells.begin(), r.cells.end())},
                           {"probes", probes_json(r)}, {"history", history_json(r)}, {"warnings", r.warnings}};
    return err;
  };

  std::vector<std::pair<std::string, InversionResult>> outputs;
  std::vector<Vec> truths;
  if (field == "joint") {
    auto [q, gm] = recover_potential_then_damping(s.op, s.coeffs, twin, basis1, basis2, s.tg, opt);
    assess("potential", q, dq);
    const double e = assess("damping", gm, dg);
    if (cfg.flag("invert", "ablations") && dq.norm() > 0.0) {
      const InversionResult early = recover_damping(s.op, s.coeffs, twin, basis1, basis2, s.tg, opt);
      const double eb = relative_cell_error(mesh, early.cells, dg);
      rec.check("ordering_ablation_error_ratio", eb / std::max(e, 1e-300), 2.0, ">=",
                "damping recovered before matching q is biased");
      rec.results()["ordering_ablation_error"] = eb;
    }
    outputs = {{"potential", q}, {"damping", gm}};
    truths = {dq, dg};
  } else {
    const LinearField lf = field == "potential" ? LinearField::potential : LinearField::damping;
    const Vec& truth = lf == LinearField::potential ? dq : dg;
    const InversionResult r = recover_linear(s.op, s.coeffs, twin, lf, basis1, basis2, s.tg, opt);
    const double e = assess(field, r, truth);
    if (cfg.flag("invert", "ablations") && truth.norm() > 0.0) {
      LinearInversionOptions none = opt;
      none.model_reversal = Reversal::none;
      const InversionResult ab = recover_linear(s.op, s.coeffs, twin, lf, basis1, basis2, s.tg, none);
      const double eb = relative_cell_error(mesh, ab.cells, truth);
      rec.check("reversal_ablation_error_ratio", eb / std::max(e, 1e-300), 2.0, ">=",
                "recovery model without time reversal must do worse");
      rec.results()["reversal_ablation_error"] = eb;
    }
    outputs = {{field, r}};
    truths = {truth};
  }

  const Vec x = omega_coords(g);
  Series overlay{"overlay", "x", "value", {}, {}, {}, "recovered vs true correction on Omega nodes"};
  for (std::size_t f = 0; f < outputs.size(); ++f) {
    const auto& [name, r] = outputs[f];
    const Vec rec_nodes = mesh.expand(r.cells);
    const Vec true_cells = mesh.expand(mesh.average(truths[f]));
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < g.omega_count(); ++j) {
      rows.push_back({x[j], truths[f][j], true_cells[j], rec_nodes[j]});
      overlay.x.insert(overlay.x.end(), {x[j], x[j]});
      overlay.y.insert(overlay.y.end(), {truths[f][j], rec_nodes[j]});
      overlay.group.insert(overlay.group.end(), {"true_" + name, "recovered_" + name});
    }
    rec.table("recovered_" + name, csv_of({"x", "true", "true_cell_average", "recovered"}, rows));
  }
  rec.series(std::move(overlay));
}

Nonlinearity configured_nonlinearity(const ExperimentConfig& cfg, const Setup& s) {
  Nonlinearity f{s.grid.restrict_to_omega(field_from(cfg, "nonlinearity", s.grid)), cfg.number("nonlinearity", "r")};
  validate_nonlinearity(f, s.grid.dimension(), s.op.exponent());
  return f;
}

SemilinearOptions configured_semilinear(const ExperimentConfig& cfg) {
  SemilinearOptions o;
  const std::string mode = cfg.text("scan", "mode");
  if (mode != "picard" && mode != "imex") throw ConfigError("[scan] mode: expected picard or imex");
  o.mode = mode == "picard" ? SemilinearMode::picard : SemilinearMode::imex;
  o.theta = cfg.number("scan", "theta");
  o.tolerance = cfg.number("scan", "tolerance");
  o.max_iter = cfg.integer("scan", "max_iter");
  o.max_escalations = cfg.integer("scan", "max_escalations");
  return o;
}

std::vector<ExteriorData> semilinear_probes(int count, double T) {
  if (count < 1 || count > 2) throw ConfigError("[scan] probes must be 1 or 2");
  std::vector<ExteriorData> out;
  out.push_back(ExteriorData::single({"W1", SpaceBump{{-1.5, 0.0}, {0.3, 1.0}}, TimeBump{0.5 * T, 0.5 * T}}));
  if (count == 2)
    out.push_back(ExteriorData::single({"W2", SpaceBump{{1.5, 0.0}, {0.3, 1.0}}, TimeBump{0.5 * T, 0.5 * T}}));
  return out;
}

Series scan_series(const AmplitudeScan& scan) {
  Series out{"amplitude_scan", "log10_eps", "log10_remainder", {}, {}, {}, ""};
  for (std::size_t k = 0; k < scan.epsilons.size(); ++k) {
    if (scan.norms[k] <= 0.0) continue;
    out.x.push_back(std::log10(scan.epsilons[k]));
    out.y.push_back(std::log10(scan.norms[k]));
  }
  out.comment = "fit: log10_remainder = " + format_double(scan.slope) + " * log10_eps + " +
                format_double(scan.intercept / std::log(10.0));
  return out;
}

std::string scan_table(const AmplitudeScan& scan) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < scan.epsilons.size(); ++k) rows.push_back({scan.epsilons[k], scan.norms[k]});
  return csv_of({"epsilon", "remainder"}, rows);
}

void run_scan(const ExperimentConfig& cfg, const Setup& s, Recorder& rec) {
  const Nonlinearity f = configured_nonlinearity(cfg, s);
  const SemilinearOptions o = configured_semilinear(cfg);
  const ExteriorData eta = semilinear_probes(1, s.tg.T).front();
  const AmplitudeScan scan = amplitude_scan(s.op, s.coeffs.gamma, f, eta, cfg.list("scan", "epsilons"), s.tg, o);
  const double margin = cfg.number("tolerances", "slope_margin");
  rec.tolerance("slope_margin", margin);
  rec.check("amplitude_scan_slope", scan.slope, f.r + 1.0 - margin, ">=");
  if (o.mode == SemilinearMode::picard) {
    const SemilinearResult run = solve_semilinear(s.op, s.coeffs.gamma, f, eta.scaled(scan.epsilons.front()), s.tg, o);
    double worst = 0.0;
    for (double r : run.ratios(run.theta, run.trajectory.times)) worst = std::max(worst, r);
    rec.check("picard_max_gap_ratio", worst, 1.0, "<", "at the largest surviving amplitude");
    rec.results()["picard"] = {{"theta", run.theta}, {"escalations", run.escalations},
                               {"sweeps", run.log.size()}};
  }
  rec.results()["dropped_epsilons"] = scan.dropped;
  rec.table("scan", scan_table(scan));
  rec.series(scan_series(scan));
}

void run_invert_semilinear(const ExperimentConfig& cfg, const Setup& s, Recorder& rec) {
  const SpatialGrid& g = s.grid;
  const Nonlinearity f = configured_nonlinearity(cfg, s);
  const SyntheticSemilinearTwin twin(s.op, s.coeffs.gamma, f, configured_semilinear(cfg));
  NonlinearInversionOptions opt;
  opt.exponent_step = cfg.number("scan", "exponent_step");
  opt.v_floor = cfg.number("scan", "v_floor");
  const auto probes = semilinear_probes(cfg.integer("scan", "probes"), s.tg.T);
  const NonlinearityRecovery out =
      recover_nonlinearity(s.op, s.coeffs.gamma, twin, probes, cfg.list("scan", "epsilons"), s.tg, opt);

  const double margin = cfg.number("tolerances", "slope_margin");
  const double tol = cfg.number("tolerances", "nonlinearity");
  rec.tolerance("slope_margin", margin);
  rec.tolerance("nonlinearity", tol);
  rec.tolerance("exponent_step", opt.exponent_step);
  rec.tolerance("v_floor", opt.v_floor);
  const double err = relative_field_error(out.qf, f.qf, out.recoverable);
  if (f.qf.norm() > 0.0) {
    rec.check("amplitude_scan_slope", out.slope, f.r + 1.0 - margin, ">=");
    rec.check("exponent_recovered", out.r_hat, f.r, "==");
    rec.check("qf_relative_error", err, tol, "<=", "on recoverable nodes");
  } else {
    rec.check("qf_zero_difference_norm", err, cfg.number("tolerances", "zero_floor"), "<=");
  }
  rec.record("unrecoverable_nodes", static_cast<double>(out.flagged.size()));
  rec.results()["r_hat"] = out.r_hat;
  rec.results()["epsilon_used"] = out.epsilon_used;
  rec.results()["flagged_nodes"] = out.flagged;

  const Vec x = omega_coords(g);
  std::vector<std::vector<double>> rows;
  Series overlay{"overlay", "x", "q_f", {}, {}, {}, "recovered vs true nonlinearity coefficient"};
  for (int j = 0; j < g.omega_count(); ++j) {
    rows.push_back({x[j], f.qf[j], out.qf[j], out.recoverable[j] ? 1.0 : 0.0});
    overlay.x.insert(overlay.x.end(), {x[j], x[j]});
    overlay.y.insert(overlay.y.end(), {f.qf[j], out.qf[j]});
    overlay.group.insert(overlay.group.end(), {"true", "recovered"});
  }
  rec.table("qf", csv_of({"x", "true", "recovered", "recoverable"}, rows));
  rec.table("scan", scan_table(out.scan));
  rec.series(std::move(overlay));
  rec.series(scan_series(out.scan));
}

}  // namespace

std::vector<SpaceBump> default_spatial_family(const std::string& window) {
  const double sign = window == "W2" ? 1.0 : -1.0;
  std::vector<SpaceBump> out;
  for (auto [c, w] : {std::pair{1.65, 0.15}, {1.35, 0.15}, {1.5, 0.3}, {1.5, 0.1}})
    out.push_back(SpaceBump{{sign * c, 0.0}, {w, 1.0}});
  return out;
}

std::pair<std::vector<BumpElement>, std::vector<BumpElement>> dn_bases(int size, double T) {
  if (size < 1 || size > 3) throw ConfigError("[dn] size must be between 1 and 3");
  const double u = 0.5 * T;  // time unit; the layout was tuned at T = 2
  const std::array<std::pair<double, double>, 3> space{{{1.5, 0.25}, {1.4, 0.15}, {1.6, 0.15}}};
  std::vector<BumpElement> b1, b2;
  for (int k = 0; k < size; ++k) {
    b1.push_back({"W1", SpaceBump{{-space[k].first, 0.0}, {space[k].second, 1.0}}, TimeBump{(0.5 + 0.3 * k) * u, 0.5 * u}});
    b2.push_back({"W2", SpaceBump{{space[k].first, 0.0}, {space[k].second, 1.0}}, TimeBump{(0.6 + 0.2 * k) * u, 0.55 * u}});
  }
  return {b1, b2};
}

Setup build_setup(const ExperimentConfig& cfg) {
  try {
    GridSpec gs;
    gs.dimension = cfg.integer("grid", "dimension");
    gs.points_per_axis = cfg.integer("grid", "points");
    gs.box_halfwidth = cfg.number("grid", "box");
    gs.omega_halfwidth = cfg.number("grid", "omega");
    SpatialGrid grid = make_grid(gs);
    FractionalOperator op = FractionalOperator::build(grid, cfg.number("operator", "s"));
    const TimeGrid tg = TimeGrid::make(cfg.number("time", "T"), cfg.integer("time", "steps"));
    parse_time_rule(cfg.text("time", "rule"));
    Coefficients c = Coefficients::zero(grid);
    c.gamma = field_from(cfg, "gamma", grid);
    c.q = grid.restrict_to_omega(field_from(cfg, "q", grid));
    c.label = "config";
    validate_coefficients(c, grid, op.exponent());
    return {std::move(grid), std::move(op), tg, std::move(c)};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid setup: ") + e.what());
  }
}

RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir, bool check_only) {
  const Setup setup = build_setup(config);
  Recorder rec(config, out_dir, check_only);
  // The single named generator for every random draw in the run.
  std::mt19937_64 rng(config.seed());
  try {
    switch (config.kind()) {
      case ExperimentKind::forward:
        run_forward(config, setup, rec, rng);
        break;
      case ExperimentKind::identities:
        run_identities(config, setup, rec, rng);
        break;
      case ExperimentKind::dn:
        run_dn(config, setup, rec);
        break;
      case ExperimentKind::runge:
        run_runge(config, setup, rec, rng);
        break;
      case ExperimentKind::invert_linear:
        run_invert_linear(config, setup, rec);
        break;
      case ExperimentKind::invert_semilinear:
        run_invert_semilinear(config, setup, rec);
        break;
      case ExperimentKind::scan:
        run_scan(config, setup, rec);
        break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    const std::string what = "pipeline " + to_string(config.kind()) + ": " + e.what();
    rec.finish(false, what);
    throw PipelineError(what);
  }
  return rec.finish(true, "");
}

std::string emit_plot_data(const std::string& manifest_path, const std::string& name, const std::string& out_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest " + manifest_path);
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + manifest_path + " is not valid JSON: " + e.what());
  }
  const json& series = manifest.value("series", json::object());
  if (!series.contains(name)) {
    std::string names;
    for (const auto& [k, v] : series.items()) names += (names.empty() ? "" : ", ") + k;
    throw ConfigError("unknown series '" + name + "'; available: " + (names.empty() ? "(none)" : names));
  }
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::ifstream src(dir / series[name]["file"].get<std::string>(), std::ios::binary);
  if (!src) throw ConfigError("series file for '" + name + "' is missing");
  std::stringstream body;
  body << src.rdbuf();
  const std::string path = out_path.empty() ? (dir / ("plot_" + name + ".csv")).string() : out_path;
  std::string content;
  if (const std::string comment = series[name].value("comment", ""); !comment.empty()) content = "# " + comment + "\n";
  content += body.str();
  Recorder::write_text(path, content);
  return path;
}

}  // namespace nlwave
