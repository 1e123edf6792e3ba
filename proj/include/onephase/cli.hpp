#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "onephase/driver.hpp"

namespace onephase {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOptimal = 0,
  kExitInfeasible = 1,
  kExitUnbounded = 2,
  kExitLimit = 3,
  kExitFailure = 4,
  kExitUsage = 5,
};

int exit_code_for(Status status);

/// Writes the versioned CSV iteration log.
void write_trace_csv(std::ostream& out, const SolveTrace& trace);

/// Runs the command line (args excludes the program name). Verbosity follows ONEPHASE_LOG
/// (quiet, summary or trace).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace onephase
