// Acceptance checks. Prints one line per criterion:
//   criterion N PASS|FAIL|SKIP  <title>  (<details>; <seconds>s)
// Exits non-zero if any of criteria 1-8 fails. Criterion 9 only runs when
// TMAZE_STRETCH=1 and never affects the exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tmaze/analysis.hpp"
#include "tmaze/commands.hpp"
#include "tmaze/config.hpp"
#include "tmaze/error.hpp"
#include "tmaze/evolution.hpp"
#include "tmaze/stats.hpp"
#include "tmaze/text_io.hpp"
#include "tmaze/trial.hpp"

namespace fs = std::filesystem;
using namespace tmaze;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 1e-12;
constexpr int kOracleCases = 1000;
constexpr double kDeskGate = 2.0;
constexpr int kDeskSeeds = 5;
constexpr int kDeskSeedsRequired = 3;
constexpr double kPlaceCodeAccuracy = 0.90;
constexpr double kBinChanceTol = 0.03;
constexpr double kClassChanceTol = 0.05;
constexpr int kShuffles = 1000;
constexpr int kAblationTrials = 20;
constexpr double kAblationP = 0.05;
constexpr double kStatsTol = 0.005;
constexpr double kStretchFitness = 4.5;
constexpr double kStretchSteps = 3500.0;
constexpr double kStretchSpatial = 0.40;

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double rel_err(double got, double want) { return std::fabs(got - want) / std::max(1.0, std::fabs(want)); }

fs::path scratch_root() {
  static const fs::path p = [] {
    fs::path d = fs::current_path() / "acceptance_scratch";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

ExperimentConfig desk_config(std::uint64_t seed, const fs::path& out) {
  ExperimentConfig cfg = load_config(std::string(TMAZE_SOURCE_DIR) + "/data/configs/desk.cfg");
  cfg.evolution.master_seed = seed;
  cfg.run.output_dir = out.string();
  return cfg;
}

// ---------------------------------------------------------------------------
// 1. Mechanics oracles

Outcome mechanics() {
  Rng rng(101);
  double worst = 0.0;
  auto track = [&](double got, double want) { worst = std::max(worst, rel_err(got, want)); };
  const RobotBody body;
  constexpr std::size_t kRecOff = kInputWeightCount;
  constexpr std::size_t kOutOff = kInputWeightCount + kRecurrentWeightCount;

  for (int c = 0; c < kOracleCases; ++c) {
    std::vector<double> genes(kGenotypeLength);
    const double scale = rng.uniform(0.05, 1.5);
    for (double& v : genes) v = rng.normal(0.0, scale);
    Genotype g(genes);
    WeightSet w = decode_genotype(g);

    // decode_genotype against flat offsets
    for (int k = 0; k < kInputCount; ++k)
      for (int i = 0; i < kHiddenCount; ++i) track(w.w_xr(k, i), genes[static_cast<std::size_t>(k * 50 + i)]);
    for (int j = 0; j < kHiddenCount; ++j)
      for (int i = 0; i < kHiddenCount; ++i) track(w.w_rr(j, i), genes[kRecOff + static_cast<std::size_t>(j * 50 + i)]);
    for (int j = 0; j < kHiddenCount; ++j)
      for (int m = 0; m < kOutputCount; ++m) track(w.w_ry(j, m), genes[kOutOff + static_cast<std::size_t>(j * 2 + m)]);
    if (encode_genotype(w) != g) return verdict(false, "encode(decode(g)) != g");

    // rnn_step against a scalar loop over the flat genes
    std::array<double, kInputCount> x{};
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    RnnState s;
    s.leak = rng.uniform(0.0, 1.0);
    for (double& v : s.activity) v = rng.uniform(-1.0, 1.0);
    RnnState next = rnn_step(s, x, w);
    for (int i = 0; i < kHiddenCount; ++i) {
      double syn = 0.0;
      for (int k = 0; k < kInputCount; ++k) syn += x[k] * genes[static_cast<std::size_t>(k * 50 + i)];
      for (int j = 0; j < kHiddenCount; ++j)
        if (j != i) syn += s.activity[j] * genes[kRecOff + static_cast<std::size_t>(j * 50 + i)];
      track(next.activity[i], (1.0 - s.leak) * std::tanh(syn) + s.leak * s.activity[i]);
    }

    // motor_output against a clamped dot product
    WheelSpeeds ws = motor_output(next, w.output, body);
    double raw[2] = {0.0, 0.0};
    for (int j = 0; j < kHiddenCount; ++j)
      for (int m = 0; m < 2; ++m) raw[m] += next.activity[j] * genes[kOutOff + static_cast<std::size_t>(j * 2 + m)];
    track(ws.left, std::clamp(raw[0], body.min_wheel_speed, body.max_wheel_speed));
    track(ws.right, std::clamp(raw[1], body.min_wheel_speed, body.max_wheel_speed));

    // compute_fitness closed form
    FitnessCounters fc;
    fc.rewards_obtained = static_cast<int>(rng.index(5));
    fc.path_visits = static_cast<int>(rng.index(12));
    fc.returned_visits = fc.path_visits ? static_cast<int>(rng.index(static_cast<std::size_t>(fc.path_visits) + 1)) : 0;
    fc.num_repeats = static_cast<int>(rng.index(8));
    double portion = fc.path_visits ? static_cast<double>(fc.returned_visits) / fc.path_visits : 0.0;
    track(compute_fitness(fc), fc.rewards_obtained + portion - 0.2 * fc.num_repeats);

    // mutation_std closed form
    int m = static_cast<int>(rng.index(2000));
    double base = rng.uniform(0.01, 1.0), half = rng.uniform(1.0, 200.0);
    track(mutation_std(m, base, half), base * half / (half + m));

    // crossover: explicit cuts, then the structure of a random two-point child
    std::vector<double> other(kGenotypeLength);
    for (double& v : other) v = rng.normal(0.0, 1.0) + 10.0;
    Genotype h(other);
    std::size_t i0 = rng.index(kGenotypeLength + 1), j0 = rng.index(kGenotypeLength + 1);
    if (i0 > j0) std::swap(i0, j0);
    Genotype child = crossover_at(g, h, i0, j0);
    for (std::size_t q = 0; q < kGenotypeLength; ++q) track(child.genes[q], (q >= i0 && q < j0) ? other[q] : genes[q]);
    Genotype tp = two_point_crossover(g, h, rng);
    std::size_t lo = 0;
    while (lo < kGenotypeLength && tp.genes[lo] == genes[lo]) ++lo;
    std::size_t hi = lo;
    while (hi < kGenotypeLength && tp.genes[hi] == other[hi]) ++hi;
    for (std::size_t q = hi; q < kGenotypeLength; ++q)
      if (tp.genes[q] != genes[q]) return verdict(false, "two-point child is not a single block swap");
  }
  const bool genes_ok = kGenotypeLength == 7150;
  return verdict(worst <= kOracleTol && genes_ok, "max rel err " + num(worst) + " over " + std::to_string(kOracleCases) +
                                                      " cases; gene count " + std::to_string(kGenotypeLength));
}

// ---------------------------------------------------------------------------
// Desk runs shared by criteria 2, 3 and 6.

struct DeskRun {
  std::uint64_t seed = 0;
  fs::path dir;
  EvolutionResult result;
};

const std::vector<DeskRun>& desk_runs() {
  static const std::vector<DeskRun> runs = [] {
    std::vector<DeskRun> out;
    for (int s = 1; s <= kDeskSeeds; ++s) {
      DeskRun r;
      r.seed = static_cast<std::uint64_t>(s);
      r.dir = scratch_root() / ("desk_seed" + std::to_string(s));
      r.result = evolve_run(desk_config(r.seed, r.dir), 1, false);
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

// ---------------------------------------------------------------------------
// 2. Determinism

std::string log_files(const fs::path& dir, int trials) {
  std::string all;
  for (int t = 0; t < trials; ++t) {
    all += read_file(dir / "logs" / (trial_stem(t) + ".csv"));
    all += read_file(dir / "logs" / (trial_stem(t) + ".summary"));
  }
  return all;
}

Outcome determinism() {
  const DeskRun& first = desk_runs().front();
  const std::string history = read_file(first.dir / "history.csv");
  const std::string best = read_file(first.dir / "best.genotype");
  const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
  const int jobs_many = static_cast<int>(std::min(4u, hw));

  fs::path again = scratch_root() / "determinism_jobs1";
  fs::path parallel = scratch_root() / "determinism_jobsN";
  evolve_run(desk_config(first.seed, again), 1, false);
  evolve_run(desk_config(first.seed, parallel), jobs_many, false);
  bool hist_ok = read_file(again / "history.csv") == history && read_file(parallel / "history.csv") == history;
  bool best_ok = read_file(again / "best.genotype") == best && read_file(parallel / "best.genotype") == best;

  Genotype g = load_genotype((first.dir / "best.genotype").string());
  const int trials = 20;
  fs::path d1 = scratch_root() / "demo_a", d2 = scratch_root() / "demo_b", d3 = scratch_root() / "demo_c";
  demo_run(desk_config(first.seed, d1), g, trials, 1);
  demo_run(desk_config(first.seed, d2), g, trials, 1);
  demo_run(desk_config(first.seed, d3), g, trials, jobs_many);
  const std::string logs = log_files(d1, trials);
  bool logs_ok = log_files(d2, trials) == logs && log_files(d3, trials) == logs;

  return verdict(hist_ok && best_ok && logs_ok,
                 std::string("history ") + (hist_ok ? "identical" : "DIFFERS") + ", best genotype " +
                     (best_ok ? "identical" : "DIFFERS") + ", 20 demo logs " + (logs_ok ? "identical" : "DIFFER") +
                     " (jobs 1, 1, " + std::to_string(jobs_many) + ", fnv " + hex64(fnv1a(history)) + ")");
}

// ---------------------------------------------------------------------------
// 3. Desk-scale evolution

Outcome desk_evolution() {
  int reached = 0;
  bool monotone = true;
  std::string values;
  for (const auto& r : desk_runs()) {
    auto rows = parse_history_csv(read_file(r.dir / "history.csv"));
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].best_so_far_fitness < rows[i - 1].best_so_far_fitness) monotone = false;
    if (r.result.best_fitness >= kDeskGate) ++reached;
    values += (values.empty() ? "" : ", ") + format_double(r.result.best_fitness);
  }
  return verdict(reached >= kDeskSeedsRequired && monotone,
                 "best-so-far by seed 1-5: " + values + "; " + std::to_string(reached) + "/5 >= 2.0; curves " +
                     (monotone ? "non-decreasing" : "DECREASE"));
}

// ---------------------------------------------------------------------------
// 4. Spatial decoder validity

Outcome spatial_decoder() {
  const MazeLayout m = canonical_triple_t();
  const BinGrid grid(m, RobotBody{}.body_radius);
  synthetic::GaussianPlaceCode code;
  Rng rng(404);
  std::vector<std::vector<TrialLog>> agents(1);
  for (int t = 0; t < 20; ++t) agents[0].push_back(synthetic::gaussian_place_log(grid, code, rng));
  SpatialReport r = spatial_decoding_report(agents, grid, 15, 5);

  ExpectedMatrix e = expected_matrix(std::span(agents[0]).subspan(0, 15), grid);
  std::vector<BinMatrix> tests;
  for (int t = 15; t < 20; ++t) tests.push_back(bin_activity_matrix(agents[0][static_cast<std::size_t>(t)], grid));
  Rng srng(405);
  double sum = 0.0;
  for (int s = 0; s < kShuffles; ++s) sum += shuffled_label_accuracy(tests, e, srng);
  const double shuffled = sum / kShuffles;
  const double chance = 1.0 / grid.size();
  return verdict(r.fraction_exact > kPlaceCodeAccuracy && std::fabs(shuffled - chance) <= kBinChanceTol,
                 "exact " + num(r.fraction_exact) + " (> 0.9), mean error " + num(r.mean_error) + " bins; shuffled " +
                     num(shuffled) + " vs 1/110 = " + num(chance) + " over 1000 shuffles");
}

// ---------------------------------------------------------------------------
// 5. Trajectory decoder validity

Outcome trajectory_decoder() {
  const MazeLayout m = canonical_triple_t();
  const BinGrid grid(m, RobotBody{}.body_radius);
  Rng rng(505);
  std::vector<TrialLog> logs;
  for (int t = 0; t < 20; ++t)
    logs.push_back(synthetic::trajectory_log(m, grid, synthetic::balanced_paths(rng, 2), rng, 0.3, 0.05));
  std::span<const TrialLog> all(logs);
  bool ok = true;
  std::string detail;
  for (const auto& spec : segment_specs(m)) {
    auto build = collect_traversals(all.subspan(0, 15), spec, grid);
    auto tests = collect_traversals(all.subspan(15, 5), spec, grid);
    auto tpl = build_template(spec, build, grid);
    TrajectoryResult r = trajectory_decode(tpl, tests, grid);
    Rng srng(derive_seed({506, fnv1a(spec.name)}));
    double sum = 0.0;
    for (int s = 0; s < kShuffles; ++s) sum += shuffled_template_accuracy(spec, build, tests, grid, srng);
    const double shuffled = sum / kShuffles;
    ok = ok && r.fraction_correct == 1.0 && std::fabs(shuffled - r.chance) <= kClassChanceTol;
    detail += (detail.empty() ? "" : "; ") + spec.name + " " + num(r.fraction_correct) + " (n=" +
              std::to_string(r.tested) + "), shuffled " + num(shuffled, 3) + " vs " + num(r.chance, 3);
  }
  return verdict(ok, detail);
}

// ---------------------------------------------------------------------------
// 6. Ablation direction

Outcome ablation_direction() {
  int checked = 0, passed = 0;
  std::string detail;
  for (const auto& r : desk_runs()) {
    if (r.result.best_fitness < kDeskGate) continue;
    ++checked;
    ExperimentConfig cfg = desk_config(r.seed, r.dir);
    Environment env = make_environment(cfg);
    const std::vector<AblationTarget> targets = {AblationTarget::kNone, AblationTarget::kOutputWeights};
    auto rows = ablation_battery(r.result.best, env, targets, kAblationTrials, r.seed, kAblationP);
    const auto& none = rows[0];
    const auto& out = rows[1];
    bool ok = out.fitness_ci.mean < none.fitness_ci.mean && out.p_value < kAblationP;
    passed += ok;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(r.seed) + ": none " +
              num(none.fitness_ci.mean, 3) + " vs output " + num(out.fitness_ci.mean, 3) + " p=" + num(out.p_value, 3);
  }
  if (checked == 0) return verdict(false, "no desk agent reached fitness 2.0");
  return verdict(passed == checked, std::to_string(passed) + "/" + std::to_string(checked) + " agents; " + detail);
}

// ---------------------------------------------------------------------------
// 7. Statistics oracles

Outcome statistics() {
  Rng rng(707);
  double worst_rs = 0.0, worst_t = 0.0;
  int cases = 0;
  for (int n = 1; n <= 8; ++n)
    for (int mm = 1; mm <= 8; ++mm)
      for (int rep = 0; rep < 6; ++rep) {
        std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(mm));
        const bool ties = rep % 2 == 0;
        for (double& v : a) v = ties ? static_cast<double>(rng.index(5)) : rng.normal(0.0, 1.0);
        for (double& v : b) v = ties ? static_cast<double>(rng.index(5)) + (rep == 4) : rng.normal(0.8, 1.0);
        std::vector<double> pooled = a;
        pooled.insert(pooled.end(), b.begin(), b.end());
        if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled[0]; })) continue;
        worst_rs = std::max(worst_rs, std::fabs(rank_sum_test(a, b) - oracle::enumerate_rank_sum(a, b)));
        ++cases;
      }
  for (int total = 2; total <= 8; ++total)
    for (int correct = 1; correct < total; ++correct)
      for (double chance : {0.25, 1.0 / 3.0, 0.5}) {
        worst_t = std::max(worst_t,
                           std::fabs(t_test_vs_chance(correct, total, chance) - oracle::t_test_oracle(correct, total, chance)));
        ++cases;
      }
  return verdict(worst_rs < kStatsTol && worst_t < kStatsTol,
                 "rank-sum max |dp| " + num(worst_rs) + ", t-test max |dp| " + num(worst_t) + " over " +
                     std::to_string(cases) + " cases");
}

// ---------------------------------------------------------------------------
// 8. Layout validation

Outcome layout_validation() {
  const RobotBody body;
  MazeLayout shipped = load_layout(std::string(TMAZE_SOURCE_DIR) + "/data/layouts/triple_t.layout");
  LayoutReport r = validate_layout(shipped, body);
  LayoutReport c = validate_layout(canonical_triple_t(), body);
  bool counts = r.corridor_bins == 110 && shipped.rewards.size() == 4 && shipped.junctions.size() == 7 &&
                shipped.segments.size() == 5;
  bool same = serialize_layout(shipped) == serialize_layout(canonical_triple_t());
  std::string problems;
  for (const auto& p : r.problems) problems += "; " + p;
  return verdict(r.ok && c.ok && counts && same,
                 "shipped file " + std::string(r.ok ? "valid" : "INVALID") + ", " + std::to_string(r.corridor_bins) +
                     " bins, " + std::to_string(shipped.rewards.size()) + " rewards, " +
                     std::to_string(shipped.junctions.size()) + " junctions, " +
                     std::to_string(shipped.segments.size()) + " segments, " +
                     (same ? "matches built-in" : "DIFFERS from built-in") + problems);
}

// ---------------------------------------------------------------------------
// 9. Full-scale stretch

Outcome full_scale() {
  const char* flag = std::getenv("TMAZE_STRETCH");
  if (!flag || std::string(flag) != "1") return {Outcome::kSkip, "set TMAZE_STRETCH=1 to run (non-gating)"};
  ExperimentConfig cfg = load_config(std::string(TMAZE_SOURCE_DIR) + "/data/configs/full.cfg");
  if (const char* g = std::getenv("TMAZE_STRETCH_GENERATIONS")) cfg.evolution.generations = std::atoi(g);
  cfg.run.output_dir = (scratch_root() / "full").string();
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* j = std::getenv("TMAZE_STRETCH_JOBS")) jobs = std::atoi(j);
  EvolutionResult res = evolve_run(cfg, jobs, false);
  const HistoryRow& last = res.history.back();
  auto logs = demo_run(cfg, res.best, 20, jobs);
  const BinGrid grid(make_environment(cfg).layout, cfg.robot.body_radius);
  std::vector<std::vector<TrialLog>> agents = {logs};
  SpatialReport sp = spatial_decoding_report(agents, grid, 15, 5);
  bool ok = res.best_fitness >= kStretchFitness && last.best_elapsed_steps < kStretchSteps &&
            sp.fraction_exact >= kStretchSpatial;
  return verdict(ok, std::to_string(cfg.evolution.generations) + " generations: best-so-far " +
                         num(res.best_fitness) + " (target >= 4.5), elapsed " + num(last.best_elapsed_steps) +
                         " steps (< 3500), spatial exact " + num(sp.fraction_exact) + " (>= 0.40), error " +
                         num(sp.mean_error) + " bins");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "mechanics oracles", mechanics},
      {2, "determinism across runs and jobs", determinism},
      {3, "desk-scale evolution", desk_evolution},
      {4, "spatial decoder validity", spatial_decoder},
      {5, "trajectory decoder validity", trajectory_decoder},
      {6, "output-weight ablation direction", ablation_direction},
      {7, "statistics oracles", statistics},
      {8, "layout validation", layout_validation},
      {9, "full-scale stretch", full_scale},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* status = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    std::printf("criterion %d %s  %s  (%s; %.1fs)\n", c.id, status, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (o.status == Outcome::kFail && c.id <= 8) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
