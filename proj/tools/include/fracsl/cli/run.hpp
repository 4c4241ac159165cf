#pragma once

#include <filesystem>
#include <string>

#include "fracsl/cli/config.hpp"
#include "fracsl/cli/manifest.hpp"

namespace fracsl::cli {

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitNumericalError = 3 };

std::string tool_version();

/// Runs one experiment into out_dir (created if missing) and writes manifest.json there.
/// Numerical failures are caught and recorded; the manifest's exit_code is the process status.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace fracsl::cli
