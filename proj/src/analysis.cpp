#include "tmaze/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tmaze/error.hpp"
#include "tmaze/parallel.hpp"
#include "tmaze/text_io.hpp"

namespace tmaze {

BinMatrix bin_activity_matrix(const TrialLog& log, const BinGrid& grid, std::size_t first, std::size_t last) {
  BinMatrix m(grid.size());
  last = std::min(last, log.rows.size());
  for (std::size_t s = first; s < last; ++s) {
    const auto& row = log.rows[s];
    int b = grid.locate(row.pose.position());
    auto dst = m.row(b);
    for (std::size_t i = 0; i < kHiddenCount; ++i) dst[i] += row.activity[i];
    ++m.counts[static_cast<std::size_t>(b)];
  }
  for (int b = 0; b < m.bins; ++b) {
    int c = m.counts[static_cast<std::size_t>(b)];
    if (c == 0) continue;
    for (double& v : m.row(b)) v /= c;
  }
  return m;
}

BinMatrix bin_activity_matrix(const TrialLog& log, const BinGrid& grid) {
  return bin_activity_matrix(log, grid, 0, log.rows.size());
}

ExpectedMatrix expected_matrix(std::span<const BinMatrix> trials) {
  if (trials.empty()) throw Error(ErrorCode::kNoSupport, "expected matrix needs at least one trial");
  ExpectedMatrix e(trials.front().bins);
  for (const auto& t : trials) {
    if (t.bins != e.bins) throw Error(ErrorCode::kConfig, "bin matrices disagree on bin count");
    for (int b = 0; b < e.bins; ++b) {
      if (!t.visited(b)) continue;
      ++e.support[static_cast<std::size_t>(b)];
      auto src = t.row(b);
      for (std::size_t i = 0; i < kHiddenCount; ++i) e.values[static_cast<std::size_t>(b) * kHiddenCount + i] += src[i];
    }
  }
  for (int b = 0; b < e.bins; ++b) {
    int c = e.support[static_cast<std::size_t>(b)];
    if (c == 0) continue;
    for (std::size_t i = 0; i < kHiddenCount; ++i) e.values[static_cast<std::size_t>(b) * kHiddenCount + i] /= c;
  }
  return e;
}

ExpectedMatrix expected_matrix(std::span<const TrialLog> logs, const BinGrid& grid) {
  std::vector<BinMatrix> mats;
  mats.reserve(logs.size());
  for (const auto& l : logs) mats.push_back(bin_activity_matrix(l, grid));
  return expected_matrix(mats);
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

int nearest_row(std::span<const double> v, const ExpectedMatrix& expected) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int b = 0; b < expected.bins; ++b) {
    if (!expected.supported(b)) continue;
    double d = euclidean(v, expected.row(b));
    if (d < best_d) {
      best_d = d;
      best = b;
    }
  }
  if (best < 0) throw Error(ErrorCode::kNoSupport, "every expected row is masked");
  return best;
}

std::vector<BinPrediction> decode_location(const BinMatrix& test, const ExpectedMatrix& expected,
                                           const BinGrid& grid) {
  std::vector<BinPrediction> out;
  for (int b = 0; b < test.bins; ++b) {
    if (!test.visited(b)) continue;
    int p = nearest_row(test.row(b), expected);
    out.push_back({b, p, grid.bin_distance(b, p)});
  }
  return out;
}

std::vector<BinPrediction> decode_location(const TrialLog& test, const ExpectedMatrix& expected,
                                           const BinGrid& grid) {
  return decode_location(bin_activity_matrix(test, grid), expected, grid);
}

void accumulate(SpatialReport& report, std::span<const BinPrediction> predictions, int bins) {
  if (report.bin_error_sum.empty()) {
    report.bin_error_sum.assign(static_cast<std::size_t>(bins), 0.0);
    report.bin_error_count.assign(static_cast<std::size_t>(bins), 0);
  }
  for (const auto& p : predictions) {
    ++report.predictions;
    if (p.predicted == p.actual) report.fraction_exact += 1.0;
    report.mean_error += p.error;
    report.bin_error_sum[static_cast<std::size_t>(p.actual)] += p.error;
    ++report.bin_error_count[static_cast<std::size_t>(p.actual)];
  }
}

void finalize(SpatialReport& report) {
  if (report.predictions == 0) return;
  report.fraction_exact /= report.predictions;
  report.mean_error /= report.predictions;
}

namespace {

void require_logs(const std::vector<TrialLog>& logs, int build, int test) {
  if (build < 1 || test < 1) throw Error(ErrorCode::kConfig, "build and test counts must be positive");
  if (static_cast<int>(logs.size()) < build + 1)
    throw Error(ErrorCode::kMissingInput, "need at least " + std::to_string(build + 1) + " logs per agent, found " +
                                              std::to_string(logs.size()));
}

}  // namespace

SpatialReport spatial_decoding_report(const std::vector<std::vector<TrialLog>>& agents, const BinGrid& grid, int build,
                                      int test) {
  SpatialReport report;
  report.bin_error_sum.assign(static_cast<std::size_t>(grid.size()), 0.0);
  report.bin_error_count.assign(static_cast<std::size_t>(grid.size()), 0);
  for (const auto& logs : agents) {
    require_logs(logs, build, test);
    auto expected = expected_matrix(std::span(logs).subspan(0, static_cast<std::size_t>(build)), grid);
    std::size_t end = std::min(logs.size(), static_cast<std::size_t>(build + test));
    for (std::size_t t = static_cast<std::size_t>(build); t < end; ++t)
      accumulate(report, decode_location(logs[t], expected, grid), grid.size());
  }
  finalize(report);
  return report;
}

double shuffled_label_accuracy(std::span<const BinMatrix> tests, const ExpectedMatrix& expected, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(expected.bins));
  std::iota(perm.begin(), perm.end(), 0);
  int total = 0;
  int exact = 0;
  for (const auto& t : tests) {
    rng.shuffle(std::span<int>(perm));
    for (int b = 0; b < t.bins; ++b) {
      if (!t.visited(b)) continue;
      ++total;
      if (nearest_row(t.row(b), expected) == perm[static_cast<std::size_t>(b)]) ++exact;
    }
  }
  return total ? static_cast<double>(exact) / total : 0.0;
}

// ---------------------------------------------------------------------------

std::vector<SegmentSpec> segment_specs(const MazeLayout& layout) {
  std::vector<SegmentSpec> out;
  const double mid = 0.5 * layout.width;
  for (const auto& s : layout.segments) {
    SegmentSpec spec;
    spec.name = s.name;
    spec.rect = s.rect;
    spec.mode = s.name.starts_with("seg8") ? CodingMode::kRetrospective : CodingMode::kProspective;
    for (const auto& r : layout.rewards) {
      bool take = true;
      if (s.name.ends_with("-1")) take = r.position.x < mid;
      if (s.name.ends_with("-2")) take = r.position.x > mid;
      if (take) spec.classes.push_back(r.path);
    }
    std::sort(spec.classes.begin(), spec.classes.end());
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<Traversal> segment_traversals(const TrialLog& log, const SegmentSpec& seg) {
  std::vector<Traversal> out;
  const auto& visits = log.summary.visits;
  std::size_t i = 0;
  while (i < log.rows.size()) {
    if (!seg.rect.contains(log.rows[i].pose.position())) {
      ++i;
      continue;
    }
    Traversal t;
    t.first = i;
    while (i < log.rows.size() && seg.rect.contains(log.rows[i].pose.position())) ++i;
    t.last = i;
    const int first_step = log.rows[t.first].step;
    const int last_step = log.rows[t.last - 1].step;
    int label = 0;
    if (seg.mode == CodingMode::kProspective) {
      for (const auto& v : visits)
        if (v.step > last_step) {
          label = v.path;
          break;
        }
    } else {
      for (const auto& v : visits)
        if (v.step < first_step) label = v.path;
    }
    if (std::find(seg.classes.begin(), seg.classes.end(), label) == seg.classes.end()) label = 0;
    t.label = label;
    out.push_back(t);
  }
  return out;
}

BinMatrix traversal_matrix(const TrialLog& log, const Traversal& t, const BinGrid& grid) {
  if (t.last <= t.first || t.first >= log.rows.size())
    throw Error(ErrorCode::kEmptyTraversal, "traversal contains no steps");
  return bin_activity_matrix(log, grid, t.first, t.last);
}

std::vector<LabelledTraversal> collect_traversals(std::span<const TrialLog> logs, const SegmentSpec& seg,
                                                  const BinGrid& grid) {
  std::vector<LabelledTraversal> out;
  for (const auto& log : logs)
    for (const auto& t : segment_traversals(log, seg))
      if (t.label != 0) out.push_back({traversal_matrix(log, t, grid), t.label});
  return out;
}

namespace {

std::vector<int> segment_bins(const Rect& r, const BinGrid& grid) {
  std::vector<int> out;
  for (int b = 0; b < grid.size(); ++b)
    if (grid.cell_rect(grid.cell(b)).overlaps(r)) out.push_back(b);
  return out;
}

}  // namespace

SegmentTemplate build_template(const SegmentSpec& spec, std::span<const LabelledTraversal> traversals,
                               const BinGrid& grid) {
  SegmentTemplate tpl;
  tpl.spec = spec;
  tpl.bins = segment_bins(spec.rect, grid);
  for (int cls : spec.classes) {
    std::vector<BinMatrix> mats;
    for (const auto& t : traversals)
      if (t.label == cls) mats.push_back(t.matrix);
    tpl.per_class.push_back(mats.empty() ? ExpectedMatrix(grid.size()) : expected_matrix(mats));
  }
  return tpl;
}

TrajectoryPrediction classify_traversal(const SegmentTemplate& tpl, const LabelledTraversal& t, const BinGrid& grid) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < tpl.per_class.size(); ++c) {
    const auto& e = tpl.per_class[c];
    double sum = 0.0;
    int n = 0;
    for (int b : tpl.bins) {
      if (!t.matrix.visited(b) || !e.supported(b)) continue;
      sum += euclidean(t.matrix.row(b), e.row(b));
      ++n;
    }
    if (n == 0) continue;
    double d = sum / n;
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (best < 0) throw Error(ErrorCode::kNoSupport, "no class template covers the traversal of " + tpl.spec.name);

  const auto& e = tpl.per_class[static_cast<std::size_t>(best)];
  double err = 0.0;
  int n = 0;
  for (int b : tpl.bins) {
    if (!t.matrix.visited(b)) continue;
    int nearest = -1;
    double nd = std::numeric_limits<double>::infinity();
    for (int c : tpl.bins) {
      if (!e.supported(c)) continue;
      double d = euclidean(t.matrix.row(b), e.row(c));
      if (d < nd) {
        nd = d;
        nearest = c;
      }
    }
    if (nearest < 0) continue;
    err += grid.bin_distance(b, nearest);
    ++n;
  }
  return {t.label, tpl.spec.classes[static_cast<std::size_t>(best)], n ? err / n : 0.0};
}

TrajectoryResult trajectory_decode(const SegmentTemplate& tpl, std::span<const LabelledTraversal> tests,
                                   const BinGrid& grid) {
  TrajectoryResult r;
  r.segment = tpl.spec.name;
  r.mode = tpl.spec.mode;
  r.classes = static_cast<int>(tpl.spec.classes.size());
  r.chance = r.classes ? 1.0 / r.classes : 0.0;
  if (tests.empty()) throw Error(ErrorCode::kEmptyTraversal, "no labelled test traversals of " + tpl.spec.name);
  double err = 0.0;
  int unsupported = 0;
  for (const auto& t : tests) {
    TrajectoryPrediction p;
    try {
      p = classify_traversal(tpl, t, grid);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoSupport) throw;
      ++unsupported;
      continue;
    }
    ++r.tested;
    if (p.predicted == p.actual) ++r.correct;
    err += p.bin_error;
  }
  if (r.tested == 0) throw Error(ErrorCode::kNoSupport, "no test traversal of " + tpl.spec.name + " is covered by a template");
  r.fraction_correct = static_cast<double>(r.correct) / r.tested;
  r.mean_bin_error = err / r.tested;
  try {
    r.p_value = t_test_vs_chance(r.correct, r.tested, r.chance);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerate) throw;
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    r.note = "degenerate";
  }
  if (unsupported) r.note += (r.note.empty() ? "" : ";") + std::to_string(unsupported) + " unsupported";
  return r;
}

double shuffled_template_accuracy(const SegmentSpec& spec, std::span<const LabelledTraversal> build,
                                  std::span<const LabelledTraversal> tests, const BinGrid& grid, Rng& rng) {
  std::vector<int> labels;
  for (const auto& t : build) labels.push_back(t.label);
  rng.shuffle(std::span<int>(labels));
  std::vector<LabelledTraversal> shuffled(build.begin(), build.end());
  for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
  auto tpl = build_template(spec, shuffled, grid);
  return trajectory_decode(tpl, tests, grid).fraction_correct;
}

std::vector<TrajectoryResult> trajectory_report(const std::vector<std::vector<TrialLog>>& agents,
                                                const MazeLayout& layout, const BinGrid& grid, int build, int test) {
  std::vector<TrajectoryResult> out;
  for (const auto& spec : segment_specs(layout)) {
    TrajectoryResult pooled;
    pooled.segment = spec.name;
    pooled.mode = spec.mode;
    pooled.classes = static_cast<int>(spec.classes.size());
    pooled.chance = pooled.classes ? 1.0 / pooled.classes : 0.0;
    double err = 0.0;
    int skipped = 0;
    for (const auto& logs : agents) {
      require_logs(logs, build, test);
      std::size_t end = std::min(logs.size(), static_cast<std::size_t>(build + test));
      auto b = collect_traversals(std::span(logs).subspan(0, static_cast<std::size_t>(build)), spec, grid);
      auto t = collect_traversals(std::span(logs).subspan(static_cast<std::size_t>(build), end - build), spec, grid);
      if (t.empty() || b.empty()) {
        ++skipped;
        continue;
      }
      auto tpl = build_template(spec, b, grid);
      try {
        auto r = trajectory_decode(tpl, t, grid);
        pooled.tested += r.tested;
        pooled.correct += r.correct;
        err += r.mean_bin_error * r.tested;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoSupport && e.code() != ErrorCode::kEmptyTraversal) throw;
        ++skipped;
      }
    }
    if (pooled.tested > 0) {
      pooled.fraction_correct = static_cast<double>(pooled.correct) / pooled.tested;
      pooled.mean_bin_error = err / pooled.tested;
      try {
        pooled.p_value = t_test_vs_chance(pooled.correct, pooled.tested, pooled.chance);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerate) throw;
        pooled.p_value = std::numeric_limits<double>::quiet_NaN();
        pooled.note = "degenerate";
      }
    } else {
      pooled.p_value = std::numeric_limits<double>::quiet_NaN();
      pooled.note = "no labelled traversals";
    }
    if (skipped && pooled.tested > 0)
      pooled.note += (pooled.note.empty() ? "" : ";") + std::to_string(skipped) + " agents without traversals";
    out.push_back(pooled);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t demo_trial_seed(std::uint64_t seed, int trial) {
  return derive_seed({seed, kStreamDemo, static_cast<std::uint64_t>(trial)});
}

std::vector<AblationRow> ablation_battery(const Genotype& agent, const Environment& env,
                                          std::span<const AblationTarget> targets, int trials, std::uint64_t seed,
                                          double alpha, int jobs) {
  const int n_targets = static_cast<int>(targets.size());
  std::vector<TrialSummary> results(static_cast<std::size_t>(n_targets * trials));
  parallel_for(n_targets * trials, jobs, [&](int k) {
    const int ti = k / trials;
    const int t = k % trials;
    results[static_cast<std::size_t>(k)] =
        run_genotype_summary(agent, env, demo_trial_seed(seed, t), {targets[static_cast<std::size_t>(ti)]});
  });

  std::vector<AblationRow> rows;
  for (int ti = 0; ti < n_targets; ++ti) {
    AblationRow row;
    row.target = targets[static_cast<std::size_t>(ti)];
    for (int t = 0; t < trials; ++t) {
      const auto& s = results[static_cast<std::size_t>(ti * trials + t)];
      row.fitness.push_back(s.fitness);
      row.elapsed.push_back(s.elapsed_steps);
    }
    row.fitness_ci = mean_ci(row.fitness);
    row.elapsed_ci = mean_ci(row.elapsed);
    rows.push_back(std::move(row));
  }
  auto none = std::find_if(rows.begin(), rows.end(), [](const AblationRow& r) { return r.target == AblationTarget::kNone; });
  if (none != rows.end()) {
    for (auto& r : rows) {
      if (r.target == AblationTarget::kNone) continue;
      try {
        r.p_value = rank_sum_test(r.fitness, none->fitness);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerate) throw;
        r.p_value = 1.0;
      }
      r.significant = r.p_value < alpha;
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

std::vector<int> visit_sequence(const TrialLog& log) {
  std::vector<int> seq;
  for (const auto& v : log.summary.visits) seq.push_back(v.path);
  return seq;
}

TransitionMatrix transition_matrix(const std::vector<std::vector<int>>& sequences, int paths) {
  TransitionMatrix m;
  m.paths = paths;
  const auto n = static_cast<std::size_t>(paths * paths);
  m.counts.assign(n, 0);
  m.probabilities.assign(n, 0.0);
  m.zero_row.assign(static_cast<std::size_t>(paths), 0);
  for (const auto& seq : sequences)
    for (std::size_t i = 1; i < seq.size(); ++i) {
      int a = seq[i - 1];
      int b = seq[i];
      if (a < 1 || a > paths || b < 1 || b > paths)
        throw Error(ErrorCode::kParse, "path id outside 1.." + std::to_string(paths));
      ++m.counts[static_cast<std::size_t>((a - 1) * paths + (b - 1))];
    }
  for (int r = 0; r < paths; ++r) {
    int total = 0;
    for (int c = 0; c < paths; ++c) total += m.counts[static_cast<std::size_t>(r * paths + c)];
    if (total == 0) {
      m.zero_row[static_cast<std::size_t>(r)] = 1;
      continue;
    }
    for (int c = 0; c < paths; ++c)
      m.probabilities[static_cast<std::size_t>(r * paths + c)] =
          static_cast<double>(m.counts[static_cast<std::size_t>(r * paths + c)]) / total;
  }
  return m;
}

TransitionMatrix transition_matrix(std::span<const TrialLog> logs, int paths) {
  std::vector<std::vector<int>> seqs;
  for (const auto& l : logs) seqs.push_back(visit_sequence(l));
  return transition_matrix(seqs, paths);
}

std::vector<TransitionEdge> transition_edges(const TransitionMatrix& m, double threshold) {
  std::vector<TransitionEdge> out;
  for (int a = 1; a <= m.paths; ++a)
    for (int b = 1; b <= m.paths; ++b)
      if (m.p(a, b) > threshold) out.push_back({a, b, m.p(a, b)});
  return out;
}

// ---------------------------------------------------------------------------

std::string common_config_hash(std::span<const TrialLog> logs, bool force) {
  if (logs.empty()) return "";
  const std::string& h = logs.front().meta.config_hash;
  for (const auto& l : logs)
    if (l.meta.config_hash != h) {
      if (force) return "mixed";
      throw Error(ErrorCode::kMixedHash,
                  "logs carry different config hashes (" + h + ", " + l.meta.config_hash + "); pass --force to mix");
    }
  return h;
}

std::string report_header_line(const ReportHeader& h) {
  return "# tmaze-report " + h.kind + " config_hash=" + h.config_hash + " agent=" + (h.agent.empty() ? "-" : h.agent) +
         " version=" + std::string(kCodeVersion) + "\n";
}

std::string spatial_summary_csv(const ReportHeader& h, const SpatialReport& r) {
  return report_header_line(h) + "predictions,fraction_exact,mean_error_bins\n" + std::to_string(r.predictions) + "," +
         format_double(r.fraction_exact) + "," + format_double(r.mean_error) + "\n";
}

std::string bin_error_map_csv(const ReportHeader& h, const SpatialReport& r, const BinGrid& grid) {
  std::string out = report_header_line(h) + "bin,col,row,x,y,mean_error,count\n";
  for (int b = 0; b < grid.size(); ++b) {
    const auto& c = grid.cell(b);
    Vec2 p = grid.center(b);
    int n = b < static_cast<int>(r.bin_error_count.size()) ? r.bin_error_count[static_cast<std::size_t>(b)] : 0;
    std::string err = n ? format_double(r.bin_error_sum[static_cast<std::size_t>(b)] / n) : "";
    out += std::to_string(b) + "," + std::to_string(c.col) + "," + std::to_string(c.row) + "," + format_double(p.x) +
           "," + format_double(p.y) + "," + err + "," + std::to_string(n) + "\n";
  }
  return out;
}

std::string trajectory_csv(const ReportHeader& h, std::span<const TrajectoryResult> rows) {
  std::string out = report_header_line(h) +
                    "segment,mode,classes,tested,correct,fraction_correct,chance,mean_bin_error,p_value,note\n";
  for (const auto& r : rows) {
    out += r.segment + "," + (r.mode == CodingMode::kProspective ? "prospective" : "retrospective") + "," +
           std::to_string(r.classes) + "," + std::to_string(r.tested) + "," + std::to_string(r.correct) + "," +
           format_double(r.fraction_correct) + "," + format_double(r.chance) + "," + format_double(r.mean_bin_error) +
           "," + format_double(r.p_value) + "," + r.note + "\n";
  }
  return out;
}

std::string ablation_csv(const ReportHeader& h, std::span<const AblationRow> rows) {
  std::string out = report_header_line(h) +
                    "ablation,trials,fitness_mean,fitness_ci95,elapsed_mean,elapsed_ci95,p_value,significant\n";
  for (const auto& r : rows) {
    out += std::string(ablation_name(r.target)) + "," + std::to_string(r.fitness_ci.n) + "," +
           format_double(r.fitness_ci.mean) + "," + format_double(r.fitness_ci.half_width) + "," +
           format_double(r.elapsed_ci.mean) + "," + format_double(r.elapsed_ci.half_width) + "," +
           (r.target == AblationTarget::kNone ? std::string() : format_double(r.p_value)) + "," +
           (r.significant ? "*" : "") + "\n";
  }
  return out;
}

std::string transitions_csv(const ReportHeader& h, const TransitionMatrix& m, double threshold) {
  std::string out = report_header_line(h) + "from,to,count,probability,edge,zero_row\n";
  for (int a = 1; a <= m.paths; ++a)
    for (int b = 1; b <= m.paths; ++b)
      out += std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(m.count(a, b)) + "," +
             format_double(m.p(a, b)) + "," + (m.p(a, b) > threshold ? "1" : "0") + "," +
             (m.zero_row[static_cast<std::size_t>(a - 1)] ? "1" : "0") + "\n";
  return out;
}

}  // namespace tmaze
