#ifndef HDUAL_TOOLS_CLI_HPP
#define HDUAL_TOOLS_CLI_HPP

#include <iosfwd>

namespace hdual::cli {

enum ExitCode : int { kPass = 0, kVerifyFail = 1, kUsage = 2, kDivergence = 3 };

// Parses argv and runs one subcommand. Reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hdual::cli

#endif
