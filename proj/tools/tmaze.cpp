#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tmaze/analysis.hpp"
#include "tmaze/commands.hpp"
#include "tmaze/config.hpp"
#include "tmaze/error.hpp"
#include "tmaze/evolution.hpp"
#include "tmaze/text_io.hpp"

namespace fs = std::filesystem;
using namespace tmaze;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  if (c.seed) cfg.evolution.master_seed = *c.seed;
  if (!c.out.empty()) cfg.run.output_dir = c.out;
  cfg.validate();
  return cfg;
}

int cmd_evolve(const Common& c, bool resume) {
  ExperimentConfig cfg = resolve_config(c);
  EvolutionResult res = evolve_run(cfg, c.jobs, resume, &std::cerr);
  std::cout << "best_so_far_fitness " << format_double(res.best_fitness) << "\n";
  std::cout << "run_dir " << cfg.run.output_dir << "\n";
  return 0;
}

int cmd_demo(const Common& c, const std::string& genotype_path, std::optional<int> trials) {
  ExperimentConfig cfg = resolve_config(c);
  if (genotype_path.empty()) throw Error(ErrorCode::kMissingInput, "--genotype is required");
  Genotype g = load_genotype(genotype_path);
  auto logs = demo_run(cfg, g, trials.value_or(cfg.run.demo_trials), c.jobs);
  for (std::size_t t = 0; t < logs.size(); ++t) {
    const auto& s = logs[t].summary;
    std::cout << trial_stem(static_cast<int>(t)) << " fitness=" << format_double(s.fitness)
              << " steps=" << s.elapsed_steps << "\n";
  }
  return 0;
}

std::vector<std::vector<TrialLog>> load_agents(const std::vector<std::string>& dirs, bool force, std::string& hash) {
  if (dirs.empty()) throw Error(ErrorCode::kMissingInput, "--logs is required");
  std::vector<std::vector<TrialLog>> agents;
  std::vector<TrialLog> all;
  for (const auto& d : dirs) {
    auto logs = read_log_dir(d);
    if (logs.empty()) throw Error(ErrorCode::kMissingInput, "no .csv logs in " + d);
    all.insert(all.end(), logs.begin(), logs.end());
    agents.push_back(std::move(logs));
  }
  hash = common_config_hash(all, force);
  return agents;
}

std::string agent_label(const std::vector<std::vector<TrialLog>>& agents) {
  std::string out;
  for (const auto& a : agents) {
    std::string id = a.front().meta.agent.empty() ? "-" : a.front().meta.agent;
    out += (out.empty() ? "" : "+") + id;
  }
  return out;
}

fs::path reports_dir(const ExperimentConfig& cfg) {
  fs::path p = fs::path(cfg.run.output_dir) / "reports";
  fs::create_directories(p);
  return p;
}

int cmd_analyze(const std::string& kind, const Common& c, const std::vector<std::string>& log_dirs,
                const std::string& genotype_path, std::optional<int> trials, bool force) {
  ExperimentConfig cfg = resolve_config(c);
  const auto& a = cfg.analysis;
  if (kind == "ablation") {
    if (genotype_path.empty()) throw Error(ErrorCode::kMissingInput, "--genotype is required for ablation");
    Genotype g = load_genotype(genotype_path);
    Environment env = make_environment(cfg);
    auto rows = ablation_battery(g, env, kAllAblations, trials.value_or(a.ablation_trials), cfg.evolution.master_seed,
                                 a.ablation_alpha, c.jobs);
    ReportHeader h{"ablation", config_hash(cfg), hex64(genotype_hash(g))};
    auto path = reports_dir(cfg) / "ablation.csv";
    write_file(path, ablation_csv(h, rows));
    std::cout << ablation_csv(h, rows);
    return 0;
  }

  std::string hash;
  auto agents = load_agents(log_dirs, force, hash);
  ReportHeader h{kind, hash, agent_label(agents)};
  MazeLayout layout = load_layout(cfg.layout);
  BinGrid grid(layout, cfg.robot.body_radius, a.bin_width, a.bin_height);
  auto dir = reports_dir(cfg);
  if (kind == "spatial") {
    auto r = spatial_decoding_report(agents, grid, a.build_trials, a.test_trials);
    write_file(dir / "spatial_summary.csv", spatial_summary_csv(h, r));
    write_file(dir / "spatial_bin_error.csv", bin_error_map_csv(h, r, grid));
    std::cout << spatial_summary_csv(h, r);
  } else if (kind == "trajectory") {
    auto rows = trajectory_report(agents, layout, grid, a.build_trials, a.test_trials);
    write_file(dir / "trajectory.csv", trajectory_csv(h, rows));
    std::cout << trajectory_csv(h, rows);
  } else if (kind == "transitions") {
    std::vector<TrialLog> all;
    for (auto& ag : agents) all.insert(all.end(), ag.begin(), ag.end());
    auto m = transition_matrix(all, static_cast<int>(layout.rewards.size()));
    write_file(dir / "transitions.csv", transitions_csv(h, m, a.transition_threshold));
    std::cout << transitions_csv(h, m, a.transition_threshold);
  } else {
    throw Error(ErrorCode::kConfig, "unknown analysis '" + kind + "'");
  }
  return 0;
}

int cmd_validate_layout(const Common& c, const std::string& layout_spec, const std::string& write_path) {
  ExperimentConfig cfg = resolve_config(c);
  MazeLayout layout = load_layout(layout_spec.empty() ? cfg.layout : layout_spec);
  if (!write_path.empty()) write_file(write_path, serialize_layout(layout));
  auto r = validate_layout(layout, cfg.robot, cfg.analysis.bin_width, cfg.analysis.bin_height);
  std::cout << "layout " << layout.name << "\n";
  for (const auto& n : r.notes) std::cout << "  " << n << "\n";
  for (const auto& p : r.problems) std::cout << "  problem: " << p << "\n";
  std::cout << (r.ok ? "valid" : "invalid") << "\n";
  return r.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triple T-maze robot simulation, evolution and neural analysis"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Experiment config file");
    sub->add_option("--seed", common.seed, "Override evolution.master_seed");
    sub->add_option("--out", common.out, "Run directory (overrides run.output_dir)");
    sub->add_option("--jobs", common.jobs, "Worker threads; never changes results")->check(CLI::PositiveNumber);
  };

  bool resume = false;
  auto* evolve = app.add_subcommand("evolve", "Run an evolutionary run into a run directory");
  add_common(evolve);
  evolve->add_flag("--resume", resume, "Continue from the newest checkpoint in the run directory");

  std::string genotype_path;
  std::optional<int> trials;
  auto* demo = app.add_subcommand("demo", "Run demo trials of a genotype and write trial logs");
  add_common(demo);
  demo->add_option("--genotype", genotype_path, "Genotype file")->required();
  demo->add_option("--trials", trials, "Number of demo trials (default run.demo_trials)");

  std::vector<std::string> log_dirs;
  bool force = false;
  auto* analyze = app.add_subcommand("analyze", "Analyses over trial logs or a genotype");
  analyze->require_subcommand(1);
  std::string kind;
  const std::pair<const char*, const char*> kinds[] = {
      {"spatial", "Bin occupancy decoding from recurrent activity"},
      {"trajectory", "Prospective and retrospective path decoding per segment"},
      {"ablation", "Sensor and weight shuffling battery for one genotype"},
      {"transitions", "Path-to-path transition probabilities"},
  };
  for (const auto& [k, help] : kinds) {
    auto* sub = analyze->add_subcommand(k, help);
    add_common(sub);
    if (std::string(k) == "ablation") {
      sub->add_option("--genotype", genotype_path, "Genotype file")->required();
      sub->add_option("--trials", trials, "Trials per ablation (default analysis.ablation_trials)");
    } else {
      sub->add_option("--logs", log_dirs, "Log directory of one agent; repeat for several agents")->required();
      sub->add_flag("--force", force, "Accept logs written under different config hashes");
    }
    sub->callback([&kind, k] { kind = k; });
  }

  std::string layout_spec;
  std::string write_path;
  auto* validate = app.add_subcommand("validate-layout", "Check a maze layout");
  add_common(validate);
  validate->add_option("--layout", layout_spec, "canonical, double_t or a layout file (default maze.layout)");
  validate->add_option("--write", write_path, "Also write the layout in file form to this path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (evolve->parsed()) return cmd_evolve(common, resume);
    if (demo->parsed()) return cmd_demo(common, genotype_path, trials);
    if (analyze->parsed()) return cmd_analyze(kind, common, log_dirs, genotype_path, trials, force);
    if (validate->parsed()) return cmd_validate_layout(common, layout_spec, write_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
