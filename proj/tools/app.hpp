#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covfair::app {

inline constexpr const char* kToolName = "covfair";
inline constexpr const char* kToolVersion = "0.3.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kSuccess = 0,
    kMeasureUndefined = 1,  // partial report written
    kConfigError = 2,
    kProviderFailure = 3,
};

/// Runs one command line (args exclude the program name). Progress and
/// errors go to `err`; command output that is not written to files goes to
/// `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covfair::app
