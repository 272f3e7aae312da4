#include "tmaze/commands.hpp"

#include <cstdio>
#include <ostream>

#include "tmaze/analysis.hpp"
#include "tmaze/parallel.hpp"
#include "tmaze/text_io.hpp"

namespace fs = std::filesystem;

namespace tmaze {

std::string trial_stem(int trial) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%02d", trial);
  return buf;
}

EvolutionResult evolve_run(const ExperimentConfig& cfg, int jobs, bool resume, std::ostream* progress) {
  cfg.validate();
  const fs::path dir = cfg.run.output_dir;
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "logs");
  fs::create_directories(dir / "reports");
  const std::string hash = config_hash(cfg);
  write_file(dir / "config.txt", "# config_hash=" + hash + " version=" + kCodeVersion + "\n" + serialize_config(cfg));

  Environment env = make_environment(cfg);
  TrialEvaluator evaluator = [&env](const Genotype& g, std::uint64_t seed) {
    TrialSummary s = run_genotype_summary(g, env, seed);
    return TrialRecord{s.fitness, s.elapsed_steps};
  };
  EvolutionOptions opts;
  opts.jobs = jobs;
  opts.config_hash = hash;
  opts.run_dir = dir;
  opts.keep_all_checkpoints = cfg.run.keep_all_checkpoints;
  if (progress) {
    opts.on_generation = [progress](const HistoryRow& r) {
      *progress << "generation " << r.generation << " best_so_far=" << format_double(r.best_so_far_fitness)
                << " mean=" << format_double(r.mean_fitness) << "\n";
    };
  }

  std::optional<Checkpoint> cp;
  if (resume) {
    if (auto path = latest_checkpoint(dir / "checkpoints")) {
      cp = load_checkpoint(*path);
      if (progress) *progress << "resuming after generation " << cp->generation << " from " << path->string() << "\n";
    }
  }
  return run_evolution(cfg.evolution, evaluator, opts, cp ? &*cp : nullptr);
}

std::vector<TrialLog> demo_run(const ExperimentConfig& cfg, const Genotype& g, int trials, int jobs) {
  cfg.validate();
  Environment env = make_environment(cfg);
  const fs::path logs = fs::path(cfg.run.output_dir) / "logs";
  fs::create_directories(logs);
  const std::string hash = config_hash(cfg);
  std::vector<TrialLog> out(static_cast<std::size_t>(trials));
  parallel_for(trials, jobs, [&](int t) {
    auto& log = out[static_cast<std::size_t>(t)];
    log = run_genotype_trial(g, env, demo_trial_seed(cfg.evolution.master_seed, t));
    log.meta.config_hash = hash;
  });
  for (int t = 0; t < trials; ++t) write_log(logs, trial_stem(t), out[static_cast<std::size_t>(t)]);
  return out;
}

}  // namespace tmaze
