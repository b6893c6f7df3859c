#pragma once

#include <ostream>

namespace qmeasure::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // invariant breach or failed verification
inline constexpr int kExitUsage = 2;

/// Parses argv, runs one subcommand and writes its JSON report to `out`.
/// Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmeasure::cli
