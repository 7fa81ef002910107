#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "eulerlab/run_config.hpp"

namespace eulerlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitHypothesis = 4,
};

/// Maps a library exception to the process exit code.
int exit_code_for(const std::exception& e);

/// config.output_dir, else $EULERLAB_OUTPUT_ROOT/<mode>, else eulerlab_runs/<mode>.
std::filesystem::path resolve_output_dir(const RunConfig& config);

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> outputs;  // file names inside output_dir, manifest last
  double wall_seconds = 0.0;
};

/// Runs a validated config and writes its artifacts, manifest.json and timing.json.
/// Throws the library errors unchanged.
RunResult execute(const RunConfig& config);

/// validate + execute with diagnostics on `log`; returns the exit code.
int run(const RunConfig& config, std::ostream& log);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace eulerlab
