#pragma once

#include <string>
#include <vector>

#include "relab/config/config.hpp"
#include "relab/run/runtime.hpp"

namespace relab::cli {

/// Everything the command line asked for, before any file is touched.
struct CliOptions {
  run::RunMode mode = run::RunMode::single;
  std::string config_ref;  ///< empty: built-in defaults (DQN on cartpole)
  std::vector<config::Override> overrides;
  bool help = false;
};

/**
 * Parses the arguments after the program name. Exactly one launch mode flag
 * (--single, --sync, --async, --eval) may appear; --config takes a dotted
 * reference; --TABLE.KEY VALUE overrides a single config entry. Malformed
 * input raises UsageError.
 */
CliOptions parse_args(const std::vector<std::string>& args);

/// Usage text: launch modes, override grammar, and the component registries.
std::string help_text();

/// Resolves and loads the requested config (or the built-in defaults), then
/// applies the overrides in command-line order.
config::ConfigTree load_cli_config(const CliOptions& opts, const std::string& config_root = ".");

/// Loads the config and runs the requested mode. The RunOptions let callers
/// observe or bound the run; tests and benchmarks enter here.
run::RunSummary run_cli(const CliOptions& opts, const run::RunOptions& run_opts = {},
                        const std::string& config_root = ".");

/// Process entry point: prints diagnostics and maps errors to exit codes
/// (malformed command lines: 2, everything else: 1).
int main_entry(int argc, char** argv);

}  // namespace relab::cli
