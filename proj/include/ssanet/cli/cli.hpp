#pragma once

#include <ostream>

namespace ssanet::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
inline constexpr int kNumerical = 3;

/// Parses and runs one subcommand: spectrum, synth, train, eval, gradcheck
/// or ablate. Results go to `out`, the resolved config and progress to
/// `err`. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssanet::cli
