#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ddib {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// Runs the command line `args` (args[0] is the program name). Results
/// and reports go to files or `out`; progress and errors go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace ddib
