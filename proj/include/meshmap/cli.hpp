#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace meshmap {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitInfeasible = 3, kExitIo = 4 };

// Runs the command line `args` (without the program name). Normal output
// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace meshmap
