#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bigcn::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kRuntimeFailure = 3,
};

/// Entry point for `bigcn <command> [flags]`. argv[0] is the program name.
/// Normal output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests: `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bigcn::cli
