#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rsolve {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitGuard = 2;
inline constexpr int kExitViolation = 3;

/// Runs the `rsolve` command line. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rsolve
