#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qqr::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kNumericalFailure = 3,
  kSizeRefusal = 4,
};

/// Runs `qqr <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qqr::cli
