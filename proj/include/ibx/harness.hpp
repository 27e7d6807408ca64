#pragma once

#include <string>

#include "ibx/config.hpp"
#include "ibx/runner.hpp"

namespace ibx {

// one-hot probe observations for every grid cell, noise block zeroed
Tensor grid_probe_observations(const NoisyGridConfig& cfg);

// env factory + probe wiring for a grid experiment
RunOptions make_grid_run_options(const ExperimentConfig& cfg);

// Drives a full training run: metrics.jsonl (flushed per interval),
// checkpoint_last.ibx at every checkpoint interval, checkpoint_final.ibx and
// summary.json at the end. On a mid-run failure the metrics stream receives
// an error record naming the episode and the last periodic checkpoint stays
// on disk. Returns the process exit code.
int run_train_command(const ExperimentConfig& cfg, const std::string& out_dir);

// rolls the stored policy for `episodes` episodes and prints a JSON report
int run_eval_command(const std::string& checkpoint_path, const ExperimentConfig& cfg,
                     std::size_t episodes);

int run_plot_command(const std::string& metrics_path, const std::string& out_dir);

}  // namespace ibx
