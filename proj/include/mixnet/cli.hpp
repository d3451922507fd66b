#pragma once

#include <iosfwd>

namespace mixnet {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,    // I/O and other runtime errors
  kExitUsage = 2,
  kExitValidation = 3, // unparsable or invalid scenario, infeasible request
  kExitInvariant = 4,  // simulation left the admissible state space
};

/// Entry point of the `mixnet` tool; writes to the given streams instead of
/// stdout/stderr so it can be driven from tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixnet
