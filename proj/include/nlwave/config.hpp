#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nlwave {

enum class ExperimentKind { forward, identities, dn, runge, invert_linear, invert_semilinear, scan };

ExperimentKind parse_kind(const std::string& name);
std::string to_string(ExperimentKind kind);
const std::vector<std::string>& kind_names();

/// Flat INI configuration checked against a fixed schema. Every schema key
/// has a resolved value after parsing; unknown sections or keys are errors.
class ExperimentConfig {
 public:
  /// Throws ConfigError naming the file, line and field.
  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig parse(const std::string& text, const std::string& origin = "<config>");
  /// Schema defaults for a kind, as if parsed from a file holding only the kind.
  static ExperimentConfig defaults(ExperimentKind kind);

  ExperimentKind kind() const { return kind_; }
  std::uint64_t seed() const;

  bool has(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  int integer(const std::string& section, const std::string& key) const;
  bool flag(const std::string& section, const std::string& key) const;
  const std::string& text(const std::string& section, const std::string& key) const;
  std::vector<double> list(const std::string& section, const std::string& key) const;

  /// Overrides one value (e.g. --seed) after validating it against the schema.
  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Every schema key with its resolved value, grouped by section.
  nlohmann::ordered_json resolved() const;

 private:
  ExperimentKind kind_ = ExperimentKind::forward;
  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace nlwave
