#pragma once

#include <ostream>

namespace laserguard::cli {

/// Exit codes: 0 success (or acoustic verdict), 1 error, 2 laser verdict.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitLaser = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace laserguard::cli
