#include "nlwave/config.hpp"

#include "nlwave/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nlwave {

namespace {

enum class Type { number, integer, flag, text, list, path };

struct Field {
  const char* section;
  const char* key;
  Type type;
  const char* fallback;
  std::vector<ExperimentKind> required_for{};
};

using K = ExperimentKind;

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"experiment", "kind", Type::text, ""},
      {"experiment", "seed", Type::integer, "0"},
      {"experiment", "label", Type::text, ""},
      {"grid", "dimension", Type::integer, "1"},
      {"grid", "points", Type::integer, "64"},
      {"grid", "box", Type::number, "2.0"},
      {"grid", "omega", Type::number, "1.0"},
      {"operator", "s", Type::number, "0.5"},
      {"time", "T", Type::number, "2.0"},
      {"time", "steps", Type::integer, "200"},
      {"time", "rule", Type::text, "scheme"},
      {"gamma", "preset", Type::text, "constant"},
      {"gamma", "base", Type::number, "0"},
      {"gamma", "amplitude", Type::number, "0"},
      {"gamma", "center", Type::number, "0"},
      {"gamma", "width", Type::number, "0.2"},
      {"gamma", "file", Type::path, ""},
      {"q", "preset", Type::text, "constant"},
      {"q", "base", Type::number, "0"},
      {"q", "amplitude", Type::number, "0"},
      {"q", "center", Type::number, "0"},
      {"q", "width", Type::number, "0.2"},
      {"q", "file", Type::path, ""},
      {"delta_gamma", "preset", Type::text, "step"},
      {"delta_gamma", "amplitude", Type::number, "0.5"},
      {"delta_gamma", "center", Type::number, "0"},
      {"delta_gamma", "width", Type::number, "0.25"},
      {"delta_q", "preset", Type::text, "gaussian"},
      {"delta_q", "amplitude", Type::number, "0.5"},
      {"delta_q", "center", Type::number, "0.1"},
      {"delta_q", "width", Type::number, "0.35"},
      {"nonlinearity", "r", Type::number, "1.0"},
      {"nonlinearity", "preset", Type::text, "gaussian"},
      {"nonlinearity", "base", Type::number, "0"},
      {"nonlinearity", "amplitude", Type::number, "2.0"},
      {"nonlinearity", "center", Type::number, "0.1"},
      {"nonlinearity", "width", Type::number, "0.3"},
      {"nonlinearity", "file", Type::path, ""},
      {"initial", "displacement", Type::number, "0"},
      {"initial", "velocity", Type::number, "0"},
      {"source", "amplitude", Type::number, "0"},
      {"source", "modes", Type::integer, "3"},
      {"exterior", "amplitude", Type::number, "0"},
      {"exterior", "window", Type::text, "W1"},
      {"exterior", "center", Type::number, "-1.5"},
      {"exterior", "halfwidth", Type::number, "0.3"},
      {"exterior", "t_center", Type::number, "-1"},
      {"exterior", "t_halfwidth", Type::number, "-1"},
      {"dn", "size", Type::integer, "3"},
      {"runge", "target", Type::text, "t1"},
      {"runge", "time_bumps", Type::integer, "8"},
      {"runge", "sizes", Type::list, "4,8,16,32"},
      {"runge", "alpha", Type::number, "-1"},
      {"runge", "suite", Type::integer, "8"},
      {"invert", "field", Type::text, "potential", {K::invert_linear}},
      {"invert", "cells", Type::integer, "16"},
      {"invert", "iterations", Type::integer, "5"},
      {"invert", "time_bumps", Type::integer, "10"},
      {"invert", "identity_weight", Type::number, "0.01"},
      {"invert", "ladder", Type::list, ""},
      {"invert", "runge_warn", Type::number, "0.5"},
      {"invert", "ablations", Type::flag, "true"},
      {"scan", "epsilons", Type::list, "0.2,0.1,0.05,0.02,0.01,0.005", {K::scan, K::invert_semilinear}},
      {"scan", "mode", Type::text, "picard"},
      {"scan", "theta", Type::number, "1"},
      {"scan", "tolerance", Type::number, "1e-12"},
      {"scan", "max_iter", Type::integer, "200"},
      {"scan", "max_escalations", Type::integer, "3"},
      {"scan", "exponent_step", Type::number, "0.25"},
      {"scan", "v_floor", Type::number, "0.05"},
      {"scan", "probes", Type::integer, "1"},
      {"tolerances", "energy", Type::number, "1e-10"},
      {"tolerances", "reversal", Type::number, "1e-10"},
      {"tolerances", "transposition", Type::number, "1e-8"},
      {"tolerances", "adjointness", Type::number, "1e-9"},
      {"tolerances", "integral", Type::number, "1e-9"},
      {"tolerances", "runge_terminal", Type::number, "0.1"},
      {"tolerances", "inversion", Type::number, "0.1"},
      {"tolerances", "zero_floor", Type::number, "1e-10"},
      {"tolerances", "slope_margin", Type::number, "0.1"},
      {"tolerances", "nonlinearity", Type::number, "0.1"},
  };
  return fields;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : schema())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Line of `key` inside `[section]`, or of the section header when key is empty.
int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[') {
      current = trim(t.substr(1, t.find(']') - 1));
      if (key.empty() && current == section) return n;
      continue;
    }
    if (current == section && trim(t.substr(0, t.find('='))) == key) return n;
  }
  return 0;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

std::vector<double> parse_list(const std::string& s, bool& ok) {
  std::vector<double> out;
  ok = true;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!parse_double(trim(item), v)) {
      ok = false;
      return {};
    }
    out.push_back(v);
  }
  return out;
}

// Empty string when the value is acceptable, otherwise the reason.
std::string check_value(const Field& f, const std::string& value) {
  switch (f.type) {
    case Type::number: {
      double v = 0.0;
      return parse_double(value, v) ? "" : "expected a number";
    }
    case Type::integer: {
      long long v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      return ec == std::errc() && p == value.data() + value.size() ? "" : "expected an integer";
    }
    case Type::flag:
      return value == "true" || value == "false" ? "" : "expected true or false";
    case Type::list: {
      bool ok = false;
      parse_list(value, ok);
      return ok ? "" : "expected a comma-separated list of numbers";
    }
    case Type::path:
      return value.empty() || std::filesystem::exists(value) ? "" : "file does not exist: " + value;
    case Type::text:
      return "";
  }
  return "";
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& section, const std::string& key,
                       const std::string& why) {
  std::string where = origin;
  if (line > 0) where += ":" + std::to_string(line);
  throw ConfigError(where + ": [" + section + "]" + (key.empty() ? "" : " " + key) + ": " + why);
}

}  // namespace

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = {"forward",         "identities",        "dn",  "runge",
                                                 "invert-linear", "invert-semilinear", "scan"};
  return names;
}

ExperimentKind parse_kind(const std::string& name) {
  const auto& names = kind_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    std::string all;
    for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("unknown experiment kind '" + name + "' (expected one of " + all + ")");
  }
  return static_cast<ExperimentKind>(it - names.begin());
}

std::string to_string(ExperimentKind kind) { return kind_names()[static_cast<std::size_t>(kind)]; }

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig cfg;
  cfg.origin_ = origin;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      fail(origin, locate(text, "", section), "", section, "keys must live inside a section");
    const bool known = std::any_of(schema().begin(), schema().end(),
                                   [&](const Field& f) { return section == f.section; });
    if (!known) fail(origin, locate(text, section, ""), section, "", "unknown section");
    for (const auto& [key, node] : body) {
      const Field* f = find_field(section, key);
      if (!f) fail(origin, locate(text, section, key), section, key, "unknown field");
      const std::string value = trim(node.data());
      if (const std::string why = check_value(*f, value); !why.empty())
        fail(origin, locate(text, section, key), section, key, why);
      cfg.values_[section][key] = value;
    }
  }

  const auto kind_it = cfg.values_["experiment"].find("kind");
  if (kind_it == cfg.values_["experiment"].end() || kind_it->second.empty())
    fail(origin, 0, "experiment", "kind", "missing required field");
  try {
    cfg.kind_ = parse_kind(kind_it->second);
  } catch (const ConfigError& e) {
    fail(origin, locate(text, "experiment", "kind"), "experiment", "kind", e.what());
  }

  for (const auto& f : schema()) {
    auto& section = cfg.values_[f.section];
    if (section.count(f.key)) continue;
    if (std::find(f.required_for.begin(), f.required_for.end(), cfg.kind_) != f.required_for.end())
      fail(origin, 0, f.section, f.key, "missing required field for kind " + to_string(cfg.kind_));
    section[f.key] = f.fallback;
  }
  // Values that only make sense together are checked here, once.
  try {
    if (cfg.integer("grid", "points") < 8) throw ConfigError("[grid] points must be at least 8");
    if (cfg.integer("time", "steps") < 2) throw ConfigError("[time] steps must be at least 2");
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  std::string text = "[experiment]\nkind = " + to_string(kind) + "\n";
  std::map<std::string, std::string> required;
  for (const auto& f : schema())
    if (std::find(f.required_for.begin(), f.required_for.end(), kind) != f.required_for.end())
      required[f.section] += std::string(f.key) + " = " + f.fallback + "\n";
  for (const auto& [section, body] : required) text += "[" + section + "]\n" + body;
  return parse(text, "<defaults>");
}

std::uint64_t ExperimentConfig::seed() const { return static_cast<std::uint64_t>(std::stoll(text("experiment", "seed"))); }

const std::string& ExperimentConfig::text(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  if (s != values_.end()) {
    const auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  throw ConfigError(origin_ + ": [" + section + "] " + key + ": not in the schema");
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  return s != values_.end() && s->second.count(key) > 0;
}

double ExperimentConfig::number(const std::string& section, const std::string& key) const {
  double v = 0.0;
  parse_double(text(section, key), v);
  return v;
}

int ExperimentConfig::integer(const std::string& section, const std::string& key) const {
  return std::stoi(text(section, key));
}

bool ExperimentConfig::flag(const std::string& section, const std::string& key) const {
  return text(section, key) == "true";
}

std::vector<double> ExperimentConfig::list(const std::string& section, const std::string& key) const {
  bool ok = false;
  return parse_list(text(section, key), ok);
}

void ExperimentConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  const Field* f = find_field(section, key);
  if (!f) fail(origin_, 0, section, key, "unknown field");
  if (const std::string why = check_value(*f, value); !why.empty()) fail(origin_, 0, section, key, why);
  values_[section][key] = value;
}

nlohmann::ordered_json ExperimentConfig::resolved() const {
  nlohmann::ordered_json out;
  for (const auto& f : schema()) {
    const std::string& v = text(f.section, f.key);
    auto& slot = out[f.section][f.key];
    switch (f.type) {
      case Type::number:
        slot = number(f.section, f.key);
        break;
      case Type::integer:
        slot = std::stoll(v);
        break;
      case Type::flag:
        slot = v == "true";
        break;
      case Type::list:
        slot = list(f.section, f.key);
        break;
      case Type::text:
      case Type::path:
        slot = v;
        break;
    }
  }
  return out;
}

}  // namespace nlwave
