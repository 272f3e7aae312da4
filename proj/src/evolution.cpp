#include "tmaze/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tmaze/error.hpp"
#include "tmaze/parallel.hpp"
#include "tmaze/text_io.hpp"

namespace tmaze {

int EvolutionConfig::elite_count() const {
  return static_cast<int>(std::floor(elite_fraction * population_size + 0.5));
}

void EvolutionConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (population_size < 2) fail("evolution.population_size must be at least 2");
  if (generations < 1) fail("evolution.generations must be at least 1");
  if (trials_per_genotype < 1) fail("evolution.trials_per_genotype must be at least 1");
  if (!(elite_fraction >= 0.0 && elite_fraction <= 1.0)) fail("evolution.elite_fraction must lie in [0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) fail("evolution.mutation_rate must lie in [0, 1]");
  if (!(mutation_std_base >= 0.0)) fail("evolution.mutation_std_base must be non-negative");
  if (!(mutation_std_halflife > 0.0)) fail("evolution.mutation_std_halflife must be positive");
  if (!(init_std >= 0.0)) fail("evolution.init_std must be non-negative");
  int e = elite_count();
  if (e < 1) fail("elite count round(elite_fraction * population_size) must be at least 1");
  if (e >= population_size) fail("elite count must leave room for at least one child");
}

double mutation_std(int m, double base, double halflife) { return base * halflife / (halflife + m); }

std::vector<int> rank_order(std::span<const double> fitness) {
  std::vector<int> order(fitness.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return fitness[static_cast<std::size_t>(a)] > fitness[static_cast<std::size_t>(b)];
  });
  return order;
}

std::vector<double> ranking_probabilities(std::span<const double> fitness) {
  const std::size_t n = fitness.size();
  auto order = rank_order(fitness);
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
  std::vector<double> p(n);
  // Tied fitness values share the mean of their rank weights.
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && fitness[static_cast<std::size_t>(order[hi])] == fitness[static_cast<std::size_t>(order[lo])]) ++hi;
    double mean_rank = static_cast<double>(n) - 0.5 * static_cast<double>(lo + hi - 1);
    for (std::size_t pos = lo; pos < hi; ++pos) p[static_cast<std::size_t>(order[pos])] = mean_rank / total;
    lo = hi;
  }
  return p;
}

RankingSelector::RankingSelector(std::span<const double> fitness) : probabilities_(ranking_probabilities(fitness)) {
  cumulative_.resize(probabilities_.size());
  std::partial_sum(probabilities_.begin(), probabilities_.end(), cumulative_.begin());
}

int RankingSelector::operator()(Rng& rng) const {
  double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<int>(it - cumulative_.begin());
}

int linear_ranking_select(std::span<const double> fitness, Rng& rng) { return RankingSelector(fitness)(rng); }

Genotype crossover_at(const Genotype& a, const Genotype& b, std::size_t i, std::size_t j) {
  if (a.genes.size() != b.genes.size())
    throw Error(ErrorCode::kBadLength, "crossover parents differ in length");
  if (i > j || j > a.genes.size()) throw Error(ErrorCode::kConfig, "crossover cut points out of order");
  Genotype child = a;
  std::copy(b.genes.begin() + static_cast<std::ptrdiff_t>(i), b.genes.begin() + static_cast<std::ptrdiff_t>(j),
            child.genes.begin() + static_cast<std::ptrdiff_t>(i));
  return child;
}

Genotype two_point_crossover(const Genotype& a, const Genotype& b, Rng& rng) {
  const std::size_t n = a.genes.size();
  std::size_t i = rng.index(n + 1);
  std::size_t j = rng.index(n + 1);
  if (i > j) std::swap(i, j);
  return crossover_at(a, b, i, j);
}

GeneMask frozen_gene_mask(const EvolutionConfig& cfg) {
  if (!cfg.freeze_input && !cfg.freeze_recurrent && !cfg.freeze_output) return {};
  GeneMask mask(kGenotypeLength, 1);
  auto clear = [&mask](std::size_t from, std::size_t count) {
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(from), count, std::uint8_t{0});
  };
  if (cfg.freeze_input) clear(0, kInputWeightCount);
  if (cfg.freeze_recurrent) clear(kInputWeightCount, kRecurrentWeightCount);
  if (cfg.freeze_output) clear(kInputWeightCount + kRecurrentWeightCount, kOutputWeightCount);
  return mask;
}

Genotype mutate(const Genotype& g, double rate, double stddev, Rng& rng, const GeneMask& mutable_genes) {
  Genotype out = g;
  if (rate <= 0.0 || stddev <= 0.0) return out;
  for (std::size_t k = 0; k < out.genes.size(); ++k) {
    if (!mutable_genes.empty() && !mutable_genes[k]) continue;
    if (rng.bernoulli(rate)) out.genes[k] += rng.normal(0.0, stddev);
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int generation, int index, int trial) {
  return derive_seed({master_seed, kStreamTrial, static_cast<std::uint64_t>(generation),
                      static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(trial)});
}

GenotypeEvaluation evaluate_genotype(const Genotype& g, const EvolutionConfig& cfg, int generation, int index,
                                     const TrialEvaluator& evaluator) {
  GenotypeEvaluation ev;
  double fsum = 0.0;
  double ssum = 0.0;
  for (int t = 0; t < cfg.trials_per_genotype; ++t) {
    TrialRecord r = evaluator(g, trial_seed(cfg.master_seed, generation, index, t));
    fsum += r.fitness;
    ssum += r.elapsed_steps;
    ev.trials.push_back(r);
  }
  ev.mean_fitness = fsum / cfg.trials_per_genotype;
  ev.mean_elapsed_steps = ssum / cfg.trials_per_genotype;
  return ev;
}

// ---------------------------------------------------------------------------

std::vector<Genotype> initial_population(const EvolutionConfig& cfg) {
  std::vector<Genotype> pop;
  pop.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) {
    Rng rng(derive_seed({cfg.master_seed, kStreamInit, static_cast<std::uint64_t>(i)}));
    Genotype g = Genotype::zeros();
    for (double& v : g.genes) v = cfg.init_std > 0.0 ? rng.normal(0.0, cfg.init_std) : 0.0;
    pop.push_back(std::move(g));
  }
  GeneMask mask = frozen_gene_mask(cfg);
  if (!mask.empty())
    for (std::size_t i = 1; i < pop.size(); ++i)
      for (std::size_t k = 0; k < kGenotypeLength; ++k)
        if (!mask[k]) pop[i].genes[k] = pop[0].genes[k];
  return pop;
}

Offspring breed(const EvolutionConfig& cfg, int m, const std::vector<Genotype>& parents,
                const std::vector<GenotypeEvaluation>& evaluations) {
  std::vector<double> fitness(evaluations.size());
  for (std::size_t i = 0; i < evaluations.size(); ++i) fitness[i] = evaluations[i].mean_fitness;
  auto order = rank_order(fitness);
  RankingSelector select(fitness);
  Rng rng(derive_seed({cfg.master_seed, kStreamBreed, static_cast<std::uint64_t>(m)}));
  const double stddev = mutation_std(m, cfg.mutation_std_base, cfg.mutation_std_halflife);
  const GeneMask mask = frozen_gene_mask(cfg);

  Offspring out;
  const int elites = cfg.elite_count();
  for (int e = 0; e < elites; ++e) {
    auto idx = static_cast<std::size_t>(order[static_cast<std::size_t>(e)]);
    out.population.push_back(parents[idx]);
    out.carried.emplace_back(cfg.reevaluate_elites ? std::nullopt : std::optional(evaluations[idx]));
  }
  while (static_cast<int>(out.population.size()) < cfg.population_size) {
    const auto& a = parents[static_cast<std::size_t>(select(rng))];
    const auto& b = parents[static_cast<std::size_t>(select(rng))];
    out.population.push_back(mutate(two_point_crossover(a, b, rng), cfg.mutation_rate, stddev, rng, mask));
    out.carried.emplace_back(std::nullopt);
  }
  return out;
}

namespace {

std::string checkpoint_name(int generation) {
  std::string digits = std::to_string(generation);
  return "gen_" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits + ".ckpt";
}

}  // namespace

EvolutionResult run_evolution(const EvolutionConfig& cfg, const TrialEvaluator& evaluator,
                              const EvolutionOptions& options, const Checkpoint* resume) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.population_size);

  std::vector<Genotype> population;
  std::vector<std::optional<GenotypeEvaluation>> carried;
  EvolutionResult result;
  int start = 0;

  if (resume) {
    if (resume->config_hash != options.config_hash)
      throw Error(ErrorCode::kCheckpointCorrupt, "checkpoint config hash " + resume->config_hash +
                                                     " does not match the current configuration " +
                                                     options.config_hash);
    if (resume->population.size() != n || resume->evaluations.size() != n)
      throw Error(ErrorCode::kCheckpointCorrupt, "checkpoint population size does not match the configuration");
    if (static_cast<int>(resume->history.size()) != resume->generation + 1)
      throw Error(ErrorCode::kCheckpointCorrupt, "checkpoint history length does not match its generation");
    result.history = resume->history;
    result.best = resume->best;
    result.best_fitness = resume->best_fitness;
    result.final_population = resume->population;
    result.final_evaluations = resume->evaluations;
    start = resume->generation + 1;
    if (start < cfg.generations) {
      Offspring off = breed(cfg, start, resume->population, resume->evaluations);
      population = std::move(off.population);
      carried = std::move(off.carried);
    }
  } else {
    population = initial_population(cfg);
    carried.assign(n, std::nullopt);
  }

  std::optional<std::filesystem::path> ckpt_dir;
  if (options.run_dir) {
    ckpt_dir = *options.run_dir / "checkpoints";
    std::filesystem::create_directories(*ckpt_dir);
  }

  for (int m = start; m < cfg.generations; ++m) {
    std::vector<GenotypeEvaluation> evals(n);
    parallel_for(cfg.population_size, options.jobs, [&](int i) {
      auto idx = static_cast<std::size_t>(i);
      evals[idx] = carried[idx] ? *carried[idx] : evaluate_genotype(population[idx], cfg, m, i, evaluator);
    });

    std::vector<double> fitness(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      fitness[i] = evals[i].mean_fitness;
      total += fitness[i];
    }
    const int gen_best = rank_order(fitness).front();
    const auto& best_eval = evals[static_cast<std::size_t>(gen_best)];

    HistoryRow row;
    row.generation = m;
    row.mean_fitness = total / static_cast<double>(n);
    if (result.history.empty() || best_eval.mean_fitness > result.best_fitness) {
      result.best = population[static_cast<std::size_t>(gen_best)];
      result.best_fitness = best_eval.mean_fitness;
      row.best_generation = m;
      row.best_index = gen_best;
      row.best_elapsed_steps = best_eval.mean_elapsed_steps;
    } else {
      const auto& prev = result.history.back();
      row.best_generation = prev.best_generation;
      row.best_index = prev.best_index;
      row.best_elapsed_steps = prev.best_elapsed_steps;
    }
    row.best_so_far_fitness = result.best_fitness;
    result.history.push_back(row);
    result.final_population = population;
    result.final_evaluations = evals;

    if (options.run_dir) {
      Checkpoint cp{options.config_hash, m, population, evals, result.best, result.best_fitness, result.history};
      auto path = *ckpt_dir / checkpoint_name(m);
      write_file(path, serialize_checkpoint(cp));
      if (!options.keep_all_checkpoints && m > 0) {
        std::error_code ec;
        std::filesystem::remove(*ckpt_dir / checkpoint_name(m - 1), ec);
      }
      const std::string provenance = "config_hash=" + options.config_hash + " version=" + kCodeVersion;
      write_file(*options.run_dir / "history.csv", "# " + provenance + "\n" + serialize_history_csv(result.history));
      save_genotype((*options.run_dir / "best.genotype").string(), result.best, provenance);
    }
    if (options.on_generation) options.on_generation(row);

    if (m + 1 < cfg.generations) {
      Offspring off = breed(cfg, m + 1, population, evals);
      population = std::move(off.population);
      carried = std::move(off.carried);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// History CSV

namespace {
constexpr const char* kHistoryHeader = "generation,best_so_far_fitness,mean_fitness,best_elapsed_steps,best_generation,best_index";
}

std::string serialize_history_csv(const std::vector<HistoryRow>& rows) {
  std::string out = std::string(kHistoryHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.generation) + "," + format_double(r.best_so_far_fitness) + "," +
           format_double(r.mean_fitness) + "," + format_double(r.best_elapsed_steps) + "," +
           std::to_string(r.best_generation) + "," + std::to_string(r.best_index) + "\n";
  }
  return out;
}

std::vector<HistoryRow> parse_history_csv(std::string_view text, std::string_view source) {
  std::vector<HistoryRow> rows;
  int line_no = 0;
  bool header = false;
  for (auto line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.starts_with("#")) continue;
    std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!header) {
      if (line != kHistoryHeader) throw Error(ErrorCode::kParse, where + ": unexpected history header");
      header = true;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() != 6) throw Error(ErrorCode::kParse, where + ": expected 6 columns");
    HistoryRow r;
    r.generation = static_cast<int>(parse_int(f[0], where));
    r.best_so_far_fitness = parse_double(f[1], where);
    r.mean_fitness = parse_double(f[2], where);
    r.best_elapsed_steps = parse_double(f[3], where);
    r.best_generation = static_cast<int>(parse_int(f[4], where));
    r.best_index = static_cast<int>(parse_int(f[5], where));
    rows.push_back(r);
  }
  if (!header) throw Error(ErrorCode::kParse, std::string(source) + ": missing history header");
  return rows;
}

// ---------------------------------------------------------------------------
// Checkpoints: a header with the state hash, then sections introduced by
// "@<name>" lines. The hash covers everything after the header.

namespace {

std::string checkpoint_body(const Checkpoint& cp) {
  std::string body;
  body += "@fitness\n";
  for (std::size_t i = 0; i < cp.evaluations.size(); ++i) {
    const auto& e = cp.evaluations[i];
    body += std::to_string(i) + "," + format_double(e.mean_fitness) + "," + format_double(e.mean_elapsed_steps);
    for (const auto& t : e.trials) body += "," + format_double(t.fitness) + "," + std::to_string(t.elapsed_steps);
    body += "\n";
  }
  body += "@history\n";
  body += serialize_history_csv(cp.history);
  body += "@best\n";
  body += serialize_genotype(cp.best);
  for (std::size_t i = 0; i < cp.population.size(); ++i) {
    body += "@genotype " + std::to_string(i) + "\n";
    body += serialize_genotype(cp.population[i]);
  }
  return body;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& cp) {
  std::string body = checkpoint_body(cp);
  std::ostringstream head;
  head << "tmaze-checkpoint v1\n";
  head << "version " << kCodeVersion << "\n";
  head << "config_hash " << cp.config_hash << "\n";
  head << "generation " << cp.generation << "\n";
  head << "population " << cp.population.size() << "\n";
  head << "best_fitness " << format_double(cp.best_fitness) << "\n";
  head << "state_hash " << hex64(fnv1a(body)) << "\n";
  head << "@end_header\n";
  return head.str() + body;
}

Checkpoint parse_checkpoint(std::string_view text, std::string_view source) {
  const std::string src(source);
  auto corrupt = [&src](const std::string& msg) { return Error(ErrorCode::kCheckpointCorrupt, src + ": " + msg); };
  const std::string_view marker = "@end_header\n";
  auto hpos = text.find(marker);
  if (hpos == std::string_view::npos) throw corrupt("missing header terminator");
  std::string_view header = text.substr(0, hpos);
  std::string_view body = text.substr(hpos + marker.size());

  Checkpoint cp;
  std::string state_hash;
  std::size_t pop_size = 0;
  bool magic = false;
  for (auto line : split(header, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    if (!magic) {
      if (line != "tmaze-checkpoint v1") throw corrupt("bad magic line");
      magic = true;
      continue;
    }
    auto sp = line.find(' ');
    auto key = line.substr(0, sp);
    auto val = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp + 1));
    try {
      if (key == "version") continue;
      if (key == "config_hash") cp.config_hash = std::string(val);
      else if (key == "generation") cp.generation = static_cast<int>(parse_int(val, src));
      else if (key == "population") pop_size = static_cast<std::size_t>(parse_int(val, src));
      else if (key == "best_fitness") cp.best_fitness = parse_double(val, src);
      else if (key == "state_hash") state_hash = std::string(val);
      else throw corrupt("unknown header key '" + std::string(key) + "'");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kCheckpointCorrupt) throw;
      throw corrupt(e.what());
    }
  }
  if (hex64(fnv1a(body)) != state_hash) throw corrupt("state hash mismatch");

  // Split body into sections.
  std::vector<std::pair<std::string, std::string_view>> sections;
  std::size_t pos = 0;
  while (pos < body.size()) {
    if (body[pos] != '@') throw corrupt("expected section marker");
    auto eol = body.find('\n', pos);
    if (eol == std::string_view::npos) throw corrupt("truncated section marker");
    std::string name(body.substr(pos + 1, eol - pos - 1));
    auto next = body.find("\n@", eol);
    std::size_t end = next == std::string_view::npos ? body.size() : next + 1;
    sections.emplace_back(name, body.substr(eol + 1, end - eol - 1));
    pos = end;
  }

  try {
    for (const auto& [name, content] : sections) {
      if (name == "fitness") {
        for (auto line : split(content, '\n')) {
          line = trim(line);
          if (line.empty()) continue;
          auto f = split(line, ',');
          if (f.size() < 3 || (f.size() - 3) % 2 != 0) throw corrupt("malformed fitness row");
          GenotypeEvaluation e;
          e.mean_fitness = parse_double(f[1], src);
          e.mean_elapsed_steps = parse_double(f[2], src);
          for (std::size_t k = 3; k < f.size(); k += 2)
            e.trials.push_back({parse_double(f[k], src), static_cast<int>(parse_int(f[k + 1], src))});
          cp.evaluations.push_back(std::move(e));
        }
      } else if (name == "history") {
        cp.history = parse_history_csv(content, src);
      } else if (name == "best") {
        cp.best = parse_genotype(content, src);
      } else if (name.starts_with("genotype ")) {
        cp.population.push_back(parse_genotype(content, src));
      } else {
        throw corrupt("unknown section '" + name + "'");
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCheckpointCorrupt) throw;
    throw corrupt(e.what());
  }
  if (cp.population.size() != pop_size || cp.evaluations.size() != pop_size)
    throw corrupt("population count does not match header");
  return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path), path.string());
}

std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) return std::nullopt;
  std::optional<std::filesystem::path> best;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".ckpt") continue;
    if (!best || e.path().filename() > best->filename()) best = e.path();
  }
  return best;
}

}  // namespace tmaze
