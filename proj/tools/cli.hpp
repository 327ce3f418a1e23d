#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spots::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kBudget = 2,
    kVerifyFailed = 3,
};

/// Runs one command line (without the program name). Outcome tokens and
/// reports go to `out`, diagnostics and default stats to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spots::cli
