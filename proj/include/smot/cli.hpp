#pragma once

namespace smot {

/// Command-line entry point: synth | detect | eval | overlay | cubes.
/// Returns the process exit status; errors print to stderr.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace smot
