#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tmaze/config.hpp"
#include "tmaze/evolution.hpp"
#include "tmaze/trial.hpp"

namespace tmaze {

/// Evolutionary run into cfg.run.output_dir: config.txt, checkpoints/, history.csv,
/// best.genotype. With `resume`, continues after the newest checkpoint if there is one.
/// Progress lines go to `progress` when given.
EvolutionResult evolve_run(const ExperimentConfig& cfg, int jobs, bool resume, std::ostream* progress = nullptr);

/// `trials` demo trials of `g`, written as logs/trial_NN.{csv,summary} under
/// cfg.run.output_dir. Seeds derive from evolution.master_seed.
std::vector<TrialLog> demo_run(const ExperimentConfig& cfg, const Genotype& g, int trials, int jobs);

std::string trial_stem(int trial);

}  // namespace tmaze
