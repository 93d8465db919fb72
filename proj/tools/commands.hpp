#pragma once

#include <ostream>

namespace condwalk::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitFail = 2;
inline constexpr int kExitUsage = 3;
inline constexpr int kExitNotCentered = 4;
inline constexpr int kExitCellBudget = 5;

/// Entry point of the condwalk tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace condwalk::cli
