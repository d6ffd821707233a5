#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cylasym {

/// Exit statuses of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNumerical = 3,
  kExitProperty = 4,
};

/// Runs `cylasym <subcommand> [--config PATH] [--out DIR] [--threads N] [--seed N]`.
/// `args` excludes the program name. Artifacts go to the output directory;
/// progress and errors go to `out` and `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cylasym
