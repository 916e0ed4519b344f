#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsb/config.hpp"

namespace rsb {

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> outputs;  // every file written, envelope last
  std::string envelope_path;
  double runtime_seconds = 0.0;
  bool complete = false;
  std::string error;                     // set when complete is false
  std::optional<bool> validation_passed;  // validate only
};

/// File names inside output_dir.
inline constexpr const char* kEnvelopeFile = "result.json";
inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

/// Runs the configured experiment over the whole ladder and parameter sets,
/// writing CSVs (or the validate report) plus the JSON envelope into
/// output_dir. Output bytes depend only on the config, never on workers.
/// A failure mid-run leaves the rows written so far, an INCOMPLETE marker
/// and an envelope with "complete": false; the error is rethrown.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* progress = nullptr);

}  // namespace rsb
