#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace kamlab::lab {

struct RunOptions {
  int workers = 1;
  bool verbose = false;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Library errors are caught and stored in the report;
/// an unknown command throws ConfigError.
Report run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& options);

}  // namespace kamlab::lab
