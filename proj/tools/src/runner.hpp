#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace tbnls::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericalFailure = 2, kAcceptanceFailure = 3 };

const std::vector<std::string>& commands();

/// Runs one subcommand, writing CSVs and manifest.json into the configured
/// output directory. Progress goes to `log`. Never throws for module errors:
/// they are mapped to exit codes and recorded in the manifest.
int run(const std::string& command, const ExperimentConfig& config, std::ostream& log);

}  // namespace tbnls::cli
