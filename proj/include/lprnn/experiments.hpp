#pragma once

#include <cstddef>
#include <string>

#include "lprnn/config.hpp"

namespace lprnn {

struct RunOutcome {
    bool diverged = false;  // a training stage hit a non-finite loss
    std::string run_dir;    // resolved output directory
};

/// Executes the configured experiment and writes resolved_config.json,
/// metrics.csv, summary.json and checkpoints into the output directory
/// (created if needed). A relative output_dir is resolved against
/// `output_root` when that is non-empty. The summary's "metrics" object is a
/// pure function of the resolved config at --threads 1; "timing" is not.
RunOutcome run_experiment(const ExperimentConfig& config, std::size_t threads,
                          const std::string& output_root = "");

/// Renders the run's stage/metric table purely from its artifacts.
/// Deterministic: same artifacts, same bytes. Throws IoError when the
/// directory lacks them.
std::string render_report(const std::string& run_dir);

}  // namespace lprnn
