#pragma once

// Command pipelines of the batch runner.

#include "fjp/cli/config.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace fjp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitConfigError = 2;

inline constexpr const char* kVersion = "0.1.0";

/// One named comparison in a run summary.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = true;
  std::string note;
};

nlohmann::json to_json(const Check& check);

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<Check> checks;
  std::vector<std::string> errors;
  std::vector<std::string> artifacts;  // relative to the output directory
  nlohmann::json summary;
};

/// Validates the spec, runs the pipeline, writes artifacts and manifest.json
/// into spec.output_dir. Progress and failures go to `log`.
/// Returns 0 on success, 1 on a verification failure, 2 on a configuration error.
int run(const ExperimentSpec& spec, std::ostream& log);

/// Same, returning everything that went into the manifest.
RunOutcome run_with_outcome(const ExperimentSpec& spec, std::ostream& log);

}  // namespace fjp::cli
