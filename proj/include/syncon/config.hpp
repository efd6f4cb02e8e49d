// Configuration-driven command layer: parses the JSON run configuration
// (strictly — unknown keys are rejected with their full path) and executes
// one subcommand, returning every output file as in-memory bytes.
#pragma once

#include <map>
#include <string>

namespace syncon {

// Named artifacts produced by one command: file name -> file contents.
// Writing them to disk is the caller's concern.
using ArtifactMap = std::map<std::string, std::string>;

/*
 * Executes one subcommand against a JSON configuration document.
 *
 * Commands: fit, simulate, mc, asymptotics, placebo, detrend.
 * Sections: panel {path, treated, treatment_period};
 *           dgp (generative-model fields);
 *           mc {label, t0_grid, t1, reps, estimators, base_seed,
 *               include_asymptotic_row, average_post};
 *           limit (population factor-structure fields);
 *           placebo {window, methods, min_train};
 *           fit {method, nonneg, sum_to_one, intercept};
 *           simulate {t0, t1, seed, wide};
 *           output {directory, formats}.
 *
 * Every section is optional but must be internally complete for the command
 * that consumes it. Every artifact map contains manifest.json recording the
 * command, a 64-bit hash of the canonicalized configuration, the effective
 * base seed, and the library version; worker count affects no output byte.
 */
ArtifactMap run_command(const std::string& command,
                        const std::string& config_json, int workers = 1);

}  // namespace syncon
