#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kDesignInfeasible = 3,
  kDimensionMismatch = 4,
  kCorruptStream = 5,
  kResourceLimit = 6,
};

/// Runs one command line (without the program name) and returns its exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpc::cli
