#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tmaze/bins.hpp"
#include "tmaze/random.hpp"
#include "tmaze/rnn.hpp"
#include "tmaze/stats.hpp"
#include "tmaze/trial.hpp"

namespace tmaze {

/// Per-bin mean activity (bins x 50, row-major) with the number of steps per bin.
struct BinMatrix {
  int bins = 0;
  std::vector<double> values;
  std::vector<int> counts;

  explicit BinMatrix(int n = 0)
      : bins(n), values(static_cast<std::size_t>(n) * kHiddenCount, 0.0), counts(static_cast<std::size_t>(n), 0) {}
  bool visited(int b) const { return counts[static_cast<std::size_t>(b)] > 0; }
  std::span<const double> row(int b) const {
    return {values.data() + static_cast<std::size_t>(b) * kHiddenCount, kHiddenCount};
  }
  std::span<double> row(int b) { return {values.data() + static_cast<std::size_t>(b) * kHiddenCount, kHiddenCount}; }
};

/// Accumulates rows [first, last) of a log; unvisited bins stay masked.
BinMatrix bin_activity_matrix(const TrialLog& log, const BinGrid& grid);
BinMatrix bin_activity_matrix(const TrialLog& log, const BinGrid& grid, std::size_t first, std::size_t last);

/// Mean over trials of the per-trial bin means; `support` counts the trials
/// that visited each bin.
struct ExpectedMatrix {
  int bins = 0;
  std::vector<double> values;
  std::vector<int> support;

  explicit ExpectedMatrix(int n = 0)
      : bins(n), values(static_cast<std::size_t>(n) * kHiddenCount, 0.0), support(static_cast<std::size_t>(n), 0) {}
  bool supported(int b) const { return support[static_cast<std::size_t>(b)] > 0; }
  std::span<const double> row(int b) const {
    return {values.data() + static_cast<std::size_t>(b) * kHiddenCount, kHiddenCount};
  }
};

ExpectedMatrix expected_matrix(std::span<const BinMatrix> trials);
ExpectedMatrix expected_matrix(std::span<const TrialLog> logs, const BinGrid& grid);

double euclidean(std::span<const double> a, std::span<const double> b);

/// Nearest supported expected row (ties: lowest index). Throws Error(kNoSupport)
/// when no row is supported.
int nearest_row(std::span<const double> v, const ExpectedMatrix& expected);

struct BinPrediction {
  int actual = 0;
  int predicted = 0;
  double error = 0.0;  // bin units
};

/// One prediction per bin visited in `test`.
std::vector<BinPrediction> decode_location(const BinMatrix& test, const ExpectedMatrix& expected, const BinGrid& grid);
std::vector<BinPrediction> decode_location(const TrialLog& test, const ExpectedMatrix& expected, const BinGrid& grid);

struct SpatialReport {
  int predictions = 0;
  double fraction_exact = 0.0;
  double mean_error = 0.0;
  std::vector<double> bin_error_sum;  // per bin
  std::vector<int> bin_error_count;
};

/// Adds predictions to a running report.
void accumulate(SpatialReport& report, std::span<const BinPrediction> predictions, int bins);
void finalize(SpatialReport& report);

/// For each agent, logs [0, build) build the expected matrix and logs
/// [build, build + test) are decoded against it; results are pooled.
SpatialReport spatial_decoding_report(const std::vector<std::vector<TrialLog>>& agents, const BinGrid& grid,
                                      int build = 15, int test = 5);

/// Exact fraction when the test bins are relabelled with a uniform random
/// permutation of all corridor bins.
double shuffled_label_accuracy(std::span<const BinMatrix> tests, const ExpectedMatrix& expected, Rng& rng);

// ---------------------------------------------------------------------------
// Trajectory-dependent decoding

enum class CodingMode { kProspective, kRetrospective };

/// An analysis segment with the paths it can be labelled with.
struct SegmentSpec {
  std::string name;
  Rect rect;
  CodingMode mode = CodingMode::kProspective;
  std::vector<int> classes;  // path ids, ascending
};

/// seg1 takes every path; "-1" segments the paths left of the centre line,
/// "-2" the ones right of it. seg8-* are retrospective, the rest prospective.
std::vector<SegmentSpec> segment_specs(const MazeLayout& layout);

/// Contiguous run of log rows whose position lies inside a segment.
struct Traversal {
  std::size_t first = 0;
  std::size_t last = 0;  // one past the end
  int label = 0;         // path id, 0 when unknown
};

/// Traversals of `seg` in `log`, labelled by the next path visit (prospective)
/// or the previous one (retrospective). Traversals whose label is not in the
/// segment's class set keep label 0.
std::vector<Traversal> segment_traversals(const TrialLog& log, const SegmentSpec& seg);

/// Mean activity per segment bin for one traversal. Throws Error(kEmptyTraversal)
/// when the traversal has no rows.
BinMatrix traversal_matrix(const TrialLog& log, const Traversal& t, const BinGrid& grid);

struct LabelledTraversal {
  BinMatrix matrix;
  int label = 0;
};

struct SegmentTemplate {
  SegmentSpec spec;
  std::vector<int> bins;                  // corridor bins touched by the segment rect
  std::vector<ExpectedMatrix> per_class;  // indexed like spec.classes
};

/// Collects labelled traversals of one segment across logs.
std::vector<LabelledTraversal> collect_traversals(std::span<const TrialLog> logs, const SegmentSpec& seg,
                                                  const BinGrid& grid);

SegmentTemplate build_template(const SegmentSpec& spec, std::span<const LabelledTraversal> traversals,
                               const BinGrid& grid);

struct TrajectoryPrediction {
  int actual = 0;
  int predicted = 0;
  double bin_error = 0.0;  // mean position error of the nearest template bins
};

/// Class with the smallest mean distance over the traversal's visited segment
/// bins (ties: first class). Throws Error(kNoSupport) if no class template
/// covers any of those bins.
TrajectoryPrediction classify_traversal(const SegmentTemplate& tpl, const LabelledTraversal& t, const BinGrid& grid);

struct TrajectoryResult {
  std::string segment;
  CodingMode mode = CodingMode::kProspective;
  int classes = 0;
  int tested = 0;
  int correct = 0;
  double fraction_correct = 0.0;
  double chance = 0.0;
  double mean_bin_error = 0.0;
  double p_value = 1.0;  // t-test against chance; NaN when undefined
  std::string note;
};

/// Decodes every labelled test traversal. Throws Error(kEmptyTraversal) if
/// there are none.
TrajectoryResult trajectory_decode(const SegmentTemplate& tpl, std::span<const LabelledTraversal> tests,
                                   const BinGrid& grid);

/// Same as trajectory_decode after shuffling the class labels of the build
/// traversals before the templates are formed.
double shuffled_template_accuracy(const SegmentSpec& spec, std::span<const LabelledTraversal> build,
                                  std::span<const LabelledTraversal> tests, const BinGrid& grid, Rng& rng);

/// Runs the whole protocol per segment for one or more agents (build/test split by log index).
std::vector<TrajectoryResult> trajectory_report(const std::vector<std::vector<TrialLog>>& agents,
                                                const MazeLayout& layout, const BinGrid& grid, int build = 15,
                                                int test = 5);

// ---------------------------------------------------------------------------
// Ablations

inline constexpr double kAblationAlpha = 0.01 / 6.0;

struct AblationRow {
  AblationTarget target = AblationTarget::kNone;
  std::vector<double> fitness;
  std::vector<double> elapsed;
  MeanCi fitness_ci;
  MeanCi elapsed_ci;
  double p_value = 1.0;  // rank-sum vs none
  bool significant = false;
};

/// Seed of demo trial `trial`; ablation runs reuse the same seeds for every target.
std::uint64_t demo_trial_seed(std::uint64_t seed, int trial);

std::vector<AblationRow> ablation_battery(const Genotype& agent, const Environment& env,
                                          std::span<const AblationTarget> targets, int trials, std::uint64_t seed,
                                          double alpha = kAblationAlpha, int jobs = 1);

// ---------------------------------------------------------------------------
// Path transitions

struct TransitionMatrix {
  int paths = 0;
  std::vector<int> counts;           // paths x paths, row = from
  std::vector<double> probabilities;
  std::vector<std::uint8_t> zero_row;

  double p(int from, int to) const {
    return probabilities[static_cast<std::size_t>((from - 1) * paths + (to - 1))];
  }
  int count(int from, int to) const { return counts[static_cast<std::size_t>((from - 1) * paths + (to - 1))]; }
};

struct TransitionEdge {
  int from = 0;
  int to = 0;
  double probability = 0.0;
};

TransitionMatrix transition_matrix(const std::vector<std::vector<int>>& sequences, int paths);
TransitionMatrix transition_matrix(std::span<const TrialLog> logs, int paths);
std::vector<int> visit_sequence(const TrialLog& log);
std::vector<TransitionEdge> transition_edges(const TransitionMatrix& m, double threshold = 0.33);

// ---------------------------------------------------------------------------
// Reports

/// Throws Error(kMixedHash) unless every log carries the same config hash (or `force`).
std::string common_config_hash(std::span<const TrialLog> logs, bool force);

struct ReportHeader {
  std::string kind;
  std::string config_hash;
  std::string agent;
};

std::string report_header_line(const ReportHeader& h);
std::string spatial_summary_csv(const ReportHeader& h, const SpatialReport& r);
std::string bin_error_map_csv(const ReportHeader& h, const SpatialReport& r, const BinGrid& grid);
std::string trajectory_csv(const ReportHeader& h, std::span<const TrajectoryResult> rows);
std::string ablation_csv(const ReportHeader& h, std::span<const AblationRow> rows);
std::string transitions_csv(const ReportHeader& h, const TransitionMatrix& m, double threshold = 0.33);

}  // namespace tmaze
