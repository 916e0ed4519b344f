#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rsb {

enum class Experiment { Theory, Overlap, FreeEnergy, HighPoints, Validate };

std::string_view to_string(Experiment e) noexcept;
std::optional<Experiment> parse_experiment(std::string_view name) noexcept;

struct ExperimentConfig {
  Experiment experiment = Experiment::Theory;
  std::vector<double> log_T;  // strictly increasing ladder
  std::vector<double> beta;
  double alpha = 0.5;
  std::vector<double> u;
  std::vector<double> gamma;  // high-point levels; empty picks per-experiment defaults
  std::size_t replicas = 200;
  std::size_t pairs_per_replica = 64;
  int grid_oversample = 8;
  std::uint64_t seed = 1;
  std::string output_dir = "rsbzeta-out";
  unsigned workers = 1;
  std::string kernel = "auto";

  /// Canonical flat key=value text; parse_config(to_text()) reproduces the config.
  std::string to_text() const;
  /// Key -> canonical value string, in key order.
  std::map<std::string, std::string> to_map() const;
};

struct ConfigIssue {
  std::string key;
  std::string message;
};

struct ConfigParse {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigIssue> issues;

  /// One line per issue: "<key>: <message>".
  std::string describe() const;
};

/// Documented keys and their accepted ranges, for help text and errors.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// Flat "key = value" lines with '#' comments. `overrides` (from CLI flags)
/// replace file values key by key. All violations are collected; config is
/// set only when there are none. Lists are comma separated; logT entries
/// also accept ln(X), e.g. ln(1e8) or ln(10^8).
ConfigParse parse_config(std::string_view source, const std::map<std::string, std::string>& overrides = {});

}  // namespace rsb
