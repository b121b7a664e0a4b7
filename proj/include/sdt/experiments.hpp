#pragma once
/// @file experiments.hpp
/// @brief Config-driven experiment runners behind the command line.
///
/// Four experiments ship: "convergence" (refinement study against the
/// closed-form reference, with rate gates), "compatibility" (uniform
/// background advected by the computed flow, gated at roundoff),
/// "contaminant" (the heterogeneous-permeability demo with snapshot
/// output), and "custom" (one coupled reference solve on a chosen mesh).
/// Runners write their artifacts under an output directory and evaluate
/// the acceptance predicates embedded in each experiment; a run that
/// completes but misses a predicate reports a nonzero exit code.  All
/// artifacts are deterministic: fixed formats, no timestamps, and the
/// config's content hash stamped into the summary.

#include "sdt/config.hpp"

#include <string>
#include <vector>

namespace sdt {

struct RunResult {
  bool pass = true;
  int exit_code = 0;  ///< 0 iff every embedded predicate passed
  std::vector<std::string> messages;   ///< progress and gate lines, in order
  std::vector<std::string> artifacts;  ///< files written (full paths)
};

/// Run the configured experiment, writing artifacts into out_dir (created
/// if missing).  Progress is printed to stdout as it happens unless quiet.
/// Misconfiguration and solver failures throw; predicate misses set
/// exit_code = 1 instead.
RunResult run_experiment(const RunConfig& config, const std::string& out_dir,
                         bool quiet);

/// Write content to path, throwing std::runtime_error on I/O failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sdt
