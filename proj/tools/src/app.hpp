#pragma once

namespace tradegrowth::cli {

// Parses argv, runs one subcommand, and returns the process exit code:
// 0 success, 1 unexpected failure, 2 config or data error, 3 non-convergence.
int run(int argc, const char* const* argv);

}  // namespace tradegrowth::cli
