#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/run_config.hpp"

namespace hypogal_cli {

enum ExitCode { kExitOk = 0, kExitCompute = 1, kExitConfig = 2 };

// Parses flags (and an optional --config key=value file). Throws ConfigError;
// returns false when help or version was printed.
bool parse_args(const std::vector<std::string>& args, RunConfig& config, std::ostream& out);

// Runs a validated config, writing outputs and the manifest into out_dir.
// Prints the one-line summary to out.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full entry point: args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hypogal_cli
