#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rnnode::cli {

// Stable exit codes for scripting.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kTrainingDiverged = 3,
  kVerificationFailed = 4,
  kIntegrationDiverged = 5,
};

// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rnnode::cli
