#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace carp::cli {

enum ExitCode : int {
  kSuccess = 0,
  kDomainError = 1,
  kUsageError = 2,
  kNonConvergence = 3,
};

/// Parses `args` (without the program name) and dispatches one subcommand.
/// Data goes to files named by --out, or to `out` when --out is absent;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace carp::cli
