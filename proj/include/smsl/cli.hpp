#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smsl::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs the `smsl` command line (argv[0] is the program name). Subcommands:
/// detect, baseline, eval, synth, sweep, replay.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace smsl::cli
