#include "nlwave/config.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

namespace {

struct RunArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool check = false;
};

int run(nlwave::ExperimentKind kind, const RunArgs& args) {
  nlwave::ExperimentConfig cfg = nlwave::ExperimentConfig::load(args.config);
  if (cfg.kind() != kind)
    throw nlwave::ConfigError(args.config + ": [experiment] kind is '" + nlwave::to_string(cfg.kind()) +
                              "' but the subcommand is '" + nlwave::to_string(kind) + "'");
  if (args.seed) cfg.set("experiment", "seed", std::to_string(*args.seed));

  const nlwave::RunSummary summary = nlwave::run_experiment(cfg, args.out, args.check);
  for (const auto& c : summary.checks) {
    std::cout << (c.relation == "record" ? "  info " : c.pass ? "  PASS " : "  FAIL ") << c.name << " = " << c.value;
    if (c.relation != "record") std::cout << "  (" << c.relation << " " << c.tolerance << ")";
    std::cout << "\n";
  }
  std::cout << "manifest: " << summary.manifest_path << "\n";
  return summary.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped nonlocal wave lab: forward solves, DN maps, Runge fits and inversions"};
  app.set_version_flag("--version", std::string(nlwave::kVersion));
  app.require_subcommand(1);

  std::map<nlwave::ExperimentKind, RunArgs> args;
  std::map<CLI::App*, nlwave::ExperimentKind> commands;
  for (const std::string& name : nlwave::kind_names()) {
    const nlwave::ExperimentKind kind = nlwave::parse_kind(name);
    RunArgs& a = args[kind];
    CLI::App* sub = app.add_subcommand(name, "Run a " + name + " experiment");
    sub->add_option("--config", a.config, "INI experiment file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", a.seed, "Override [experiment] seed");
    sub->add_flag("--check", a.check, "Evaluate checks only; skip tables and series");
    commands[sub] = kind;
  }

  std::string manifest, series, plot_out;
  CLI::App* plot = app.add_subcommand("plot", "Write plot-ready CSV for one series of a finished run");
  plot->add_option("--manifest", manifest, "manifest.json of the run")->required();
  plot->add_option("--series", series, "Series name")->required();
  plot->add_option("--out", plot_out, "Output CSV (default: plot_<series>.csv next to the manifest)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      std::cout << nlwave::emit_plot_data(manifest, series, plot_out) << "\n";
      return 0;
    }
    for (const auto& [sub, kind] : commands)
      if (sub->parsed()) return run(kind, args[kind]);
  } catch (const nlwave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlwave::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const nlwave::PipelineError& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
