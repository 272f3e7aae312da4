#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmaze/random.hpp"
#include "tmaze/rnn.hpp"

namespace tmaze {

struct EvolutionConfig {
  int population_size = 50;
  int generations = 200;
  int trials_per_genotype = 5;
  double elite_fraction = 0.10;
  double mutation_rate = 0.06;
  double mutation_std_base = 0.3;
  double mutation_std_halflife = 50.0;
  double init_std = 0.3;
  std::uint64_t master_seed = 1;
  bool reevaluate_elites = false;
  // Frozen blocks keep their generation-0 values, shared by the whole population.
  bool freeze_input = false;
  bool freeze_recurrent = false;
  bool freeze_output = false;

  /// round-half-up(elite_fraction * population_size).
  int elite_count() const;
  /// Throws Error(kConfig) on out-of-range values.
  void validate() const;
};

/// base * halflife / (halflife + m).
double mutation_std(int m, double base = 0.3, double halflife = 50.0);

/// Rank weights r / sum(r) per index, r = 1 for the worst and N for the best.
/// Equal fitness values share the mean weight of the ranks they span.
std::vector<double> ranking_probabilities(std::span<const double> fitness);

/// Samples indices with linear-ranking probabilities.
class RankingSelector {
 public:
  explicit RankingSelector(std::span<const double> fitness);
  int operator()(Rng& rng) const;
  std::span<const double> probabilities() const { return probabilities_; }

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

int linear_ranking_select(std::span<const double> fitness, Rng& rng);

/// a[0, i) ++ b[i, j) ++ a[j, n).
Genotype crossover_at(const Genotype& a, const Genotype& b, std::size_t i, std::size_t j);
/// Cut points from two uniform draws on [0, n], sorted.
Genotype two_point_crossover(const Genotype& a, const Genotype& b, Rng& rng);

/// Which genes may change under mutation; empty means all of them.
using GeneMask = std::vector<std::uint8_t>;
GeneMask frozen_gene_mask(const EvolutionConfig& cfg);

Genotype mutate(const Genotype& g, double rate, double stddev, Rng& rng, const GeneMask& mutable_genes = {});

/// Seed for trial `trial` of genotype `index` in generation `generation`.
std::uint64_t trial_seed(std::uint64_t master_seed, int generation, int index, int trial);

struct TrialRecord {
  double fitness = 0.0;
  int elapsed_steps = 0;
  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct GenotypeEvaluation {
  double mean_fitness = 0.0;
  double mean_elapsed_steps = 0.0;
  std::vector<TrialRecord> trials;
  friend bool operator==(const GenotypeEvaluation&, const GenotypeEvaluation&) = default;
};

/// Runs one trial of a genotype with the given seed. Must be safe to call concurrently.
using TrialEvaluator = std::function<TrialRecord(const Genotype&, std::uint64_t seed)>;

GenotypeEvaluation evaluate_genotype(const Genotype& g, const EvolutionConfig& cfg, int generation, int index,
                                     const TrialEvaluator& evaluator);

/// One row of history.csv.
struct HistoryRow {
  int generation = 0;
  double best_so_far_fitness = 0.0;
  double mean_fitness = 0.0;
  double best_elapsed_steps = 0.0;  // of the best-so-far genotype
  int best_generation = 0;          // where the best-so-far genotype was evaluated
  int best_index = 0;
  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

std::string serialize_history_csv(const std::vector<HistoryRow>& rows);
std::vector<HistoryRow> parse_history_csv(std::string_view text, std::string_view source = "<history>");

/// State after generation `generation` has been evaluated.
struct Checkpoint {
  std::string config_hash;
  int generation = 0;
  std::vector<Genotype> population;
  std::vector<GenotypeEvaluation> evaluations;
  Genotype best;
  double best_fitness = 0.0;
  std::vector<HistoryRow> history;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string serialize_checkpoint(const Checkpoint& cp);
/// Throws Error(kCheckpointCorrupt) when the stored state hash does not match the contents.
Checkpoint parse_checkpoint(std::string_view text, std::string_view source = "<checkpoint>");
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Newest checkpoint file in `dir`, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& dir);

struct EvolutionOptions {
  int jobs = 1;
  std::string config_hash = "0000000000000000";
  /// When set, checkpoints go to `<run_dir>/checkpoints` and history.csv and
  /// best.genotype to `run_dir` after every generation.
  std::optional<std::filesystem::path> run_dir;
  bool keep_all_checkpoints = false;
  std::function<void(const HistoryRow&)> on_generation;
};

struct EvolutionResult {
  std::vector<HistoryRow> history;
  Genotype best;
  double best_fitness = 0.0;
  std::vector<Genotype> final_population;
  std::vector<GenotypeEvaluation> final_evaluations;
};

/// Generation 0 is drawn from Gaussian(0, init_std). Each later generation
/// keeps the elites unchanged and fills the rest with children of two ranked
/// parents (crossover, then mutation with mutation_std(m)). Continuing from a
/// checkpoint yields the same run as an uninterrupted one; a checkpoint from a
/// different configuration raises Error(kCheckpointCorrupt).
EvolutionResult run_evolution(const EvolutionConfig& cfg, const TrialEvaluator& evaluator,
                              const EvolutionOptions& options = {}, const Checkpoint* resume = nullptr);

/// Population for generation `m` bred from generation m - 1.
struct Offspring {
  std::vector<Genotype> population;
  std::vector<std::optional<GenotypeEvaluation>> carried;  // stored elite fitness
};
Offspring breed(const EvolutionConfig& cfg, int m, const std::vector<Genotype>& parents,
                const std::vector<GenotypeEvaluation>& evaluations);
std::vector<Genotype> initial_population(const EvolutionConfig& cfg);

/// Indices sorted best first (ties: lower index first).
std::vector<int> rank_order(std::span<const double> fitness);

}  // namespace tmaze
