#pragma once

#include <string>
#include <vector>

namespace acorr::cli {

/// Process exit codes, also listed in `acorr --help`.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kContract = 4,
  kNumeric = 5,
};

/// Entry point shared by the `acorr` binary and the tests.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace acorr::cli
