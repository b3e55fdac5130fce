#pragma once

namespace vbsynth::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kInputError = 2,
    kSynthesisError = 3,
};

/// Parse argv and run one subcommand: synth, masks, drift-stats or sta-check.
int run(int argc, char** argv);

} // namespace vbsynth::cli
