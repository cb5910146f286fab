#pragma once

#include <filesystem>
#include <string>

#include "fracspde/harness/config.hpp"

namespace fracspde::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailed = 1,        ///< acceptance criteria not met
  kExitInvalidConfig = 2,
  kExitNumerical = 3,     ///< accuracy not achieved or instability
  kExitInconclusive = 4,  ///< Monte Carlo bands too wide; results are still written
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::filesystem::path dir;
};

/// Validates, dispatches on config.kind and writes the artifacts. Never throws
/// for configuration or numerical failures; they map to exit codes.
RunResult run(const RunConfig& config);

/// Code version recorded in every manifest.
const char* code_version();

}  // namespace fracspde::harness
