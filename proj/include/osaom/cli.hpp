#pragma once

#include "osaom/estimation.hpp"
#include "osaom/text_io.hpp"

namespace osaom {

// Builds the panel (networks, behavior, covariates, constants) from a run
// configuration; `allow_single_wave` relaxes the two-wave requirement for
// pure simulation runs.
Panel load_panel(const KeyValueConfig& cfg, bool allow_single_wave = false);

// Effect lists from the `effects.weak/strong/behavior` keys.
ModelSpec load_model(const KeyValueConfig& cfg, const Panel& panel);

// Parameter vector for simulation: `theta.<dependent>.<effect>` plus
// `rate.<dependent>[.<period>]` keys.
Eigen::VectorXd load_parameters(const KeyValueConfig& cfg, const ModelSpec& model,
                                const ParamLayout& layout);

EstimationOptions load_estimation_options(const KeyValueConfig& cfg);

void write_result_file(const std::string& path, const EstimationResult& result);
EstimationResult read_result_file(const std::string& path);

// Entry point used by the osaom binary; returns the process exit code
// (0 ok, 1 data, 2 config/usage, 3 numerical, 4 non-convergence).
int run_cli(int argc, const char* const* argv);

}  // namespace osaom
