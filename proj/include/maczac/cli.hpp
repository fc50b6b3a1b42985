#pragma once

#include <iosfwd>

namespace maczac {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,     // bad flags or configuration
    kExitInvariant = 3,  // a cross-check failed
};

/// Entry point of the `maczac` tool. Subcommands: characterize, sweep,
/// qkd-run, qudit, keyrate, waveforms.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace maczac
