#pragma once

#include <string>
#include <vector>

namespace tomomax {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitNonConvergence = 3,
};

/// Runs the command-line tool; args[0] is the program name. Returns the exit code.
int run_cli(const std::vector<std::string> &args);

}  // namespace tomomax
