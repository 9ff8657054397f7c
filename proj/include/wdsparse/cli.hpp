#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wdsparse::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kComputational = 2,
  kViolation = 3,
};

/// Runs one command line. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wdsparse::cli
