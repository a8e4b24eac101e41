#ifndef OMNIGSR_TOOLS_CLI_HPP
#define OMNIGSR_TOOLS_CLI_HPP

#include <ostream>

namespace omnigsr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `omnigsr` tool; returns the process exit code.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace omnigsr::cli

#endif  // OMNIGSR_TOOLS_CLI_HPP
