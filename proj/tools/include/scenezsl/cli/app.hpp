#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scenezsl::cli {

/// Parses `args` (without the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 runtime failure, 2 usage
/// error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenezsl::cli
