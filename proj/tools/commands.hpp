#pragma once

#include <string>
#include <vector>

namespace elastoplast::cli {

/// Dispatches one subcommand: simulate, control, lincontrol, lyapunov, recur,
/// kernel-tv, couple, mix, invariant, noise-check, validate. Writes outputs
/// under the run directory. Returns 0 on success, 1 on validation failure,
/// 2 on runtime error.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, char** argv);

}  // namespace elastoplast::cli
