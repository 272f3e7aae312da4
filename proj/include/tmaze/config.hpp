#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "tmaze/evolution.hpp"
#include "tmaze/trial.hpp"

namespace tmaze {

struct AnalysisConfig {
  double bin_width = 0.08;
  double bin_height = 0.10;
  int build_trials = 15;
  int test_trials = 5;
  int ablation_trials = 20;
  double ablation_alpha = 0.01 / 6.0;
  double transition_threshold = 0.33;
};

struct RunConfig {
  std::string output_dir = "runs/default";
  int demo_trials = 20;
  bool keep_all_checkpoints = false;
};

/// Everything an experiment depends on. The master seed lives in
/// evolution.master_seed and also seeds demo and ablation trials.
struct ExperimentConfig {
  std::string layout = "canonical";  // "canonical", "double_t" or a layout file path
  RobotBody robot;
  SensorConfig sensors;
  double rnn_leak = kDefaultLeak;
  AvoidanceConfig avoidance;
  TrialConfig trial;
  EvolutionConfig evolution;
  AnalysisConfig analysis;
  RunConfig run;

  /// Throws Error(kConfig) naming the offending key.
  void validate() const;
};

/// `key = value` lines; '#' starts a comment. Unknown or repeated keys and bad
/// values raise Error(kConfig) with the line number.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::string& path);
/// Canonical form: every key, fixed order, shortest round-trip numbers.
std::string serialize_config(const ExperimentConfig& cfg);
/// FNV-1a of the canonical form, 16 hex digits. Where files go and how many
/// checkpoints are kept do not enter the hash.
std::string config_hash(const ExperimentConfig& cfg);

/// Layout loaded and bundled with the physical constants.
Environment make_environment(const ExperimentConfig& cfg);

}  // namespace tmaze
