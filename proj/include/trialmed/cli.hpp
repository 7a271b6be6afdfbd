#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trialmed::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kData = 3,
  kFit = 4,
};

/// Runs one command line (without the program name). Tables go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trialmed::cli
