#include "tmaze/trial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tmaze/error.hpp"
#include "tmaze/text_io.hpp"

namespace tmaze {

bool TrialState::obtained(int path) const {
  return std::binary_search(rewards_obtained.begin(), rewards_obtained.end(), path);
}

TrialState initial_state(const MazeLayout& layout, const Pose& start, std::uint64_t seed) {
  TrialState s;
  s.pose = start;
  s.door_states = layout.all_open();
  s.trigger_entered.assign(layout.doors.size(), 0);
  s.rng_seed = seed;
  s.at_home = true;
  return s;
}

std::string StepEvents::to_string() const {
  std::string out;
  auto add = [&out](const std::string& t) {
    if (!out.empty()) out += '|';
    out += t;
  };
  if (armed) add("armed");
  for (int d : doors_closed) add("door:" + std::to_string(d));
  if (visit_path) add((repeat ? "repeat:" : "visit:") + std::to_string(visit_path));
  if (home_return) add("home");
  if (doors_reset) add("reset");
  return out;
}

namespace {

bool past_exit(const Rect& r, ExitSide side, Vec2 p) {
  switch (side) {
    case ExitSide::kPosX: return p.x > r.x1;
    case ExitSide::kNegX: return p.x < r.x0;
    case ExitSide::kPosY: return p.y > r.y1;
    case ExitSide::kNegY: return p.y < r.y0;
  }
  return false;
}

}  // namespace

void update_doors(TrialState& trial, const MazeLayout& layout, StepEvents& events) {
  const Vec2 p = trial.pose.position();
  for (std::size_t i = 0; i < layout.doors.size(); ++i) {
    if (trial.door_states[i]) continue;
    const Door& d = layout.doors[i];
    if (d.trigger.contains(p)) {
      trial.trigger_entered[i] = 1;
    } else if (trial.trigger_entered[i]) {
      trial.trigger_entered[i] = 0;
      if (past_exit(d.trigger, d.exit, p)) {
        trial.door_states[i] = 1;
        events.doors_closed.push_back(d.id);
      }
    }
  }
}

void check_reward(TrialState& trial, const MazeLayout& layout, StepEvents& events) {
  const Vec2 p = trial.pose.position();
  if (!trial.crediting_armed && layout.start_segment().contains(p)) {
    trial.crediting_armed = true;
    trial.phase = Phase::kOutbound;
    events.armed = true;
  }
  if (!trial.crediting_armed) return;
  for (const auto& site : layout.rewards) {
    if (norm(p - site.position) >= site.radius) continue;
    trial.visits.push_back({site.path, false, trial.step});
    if (trial.obtained(site.path)) {
      ++trial.num_repeats;
      events.repeat = true;
    } else {
      trial.rewards_obtained.insert(
          std::upper_bound(trial.rewards_obtained.begin(), trial.rewards_obtained.end(), site.path), site.path);
    }
    events.visit_path = site.path;
    trial.crediting_armed = false;
    trial.phase = Phase::kReturning;
    return;
  }
}

void check_home(TrialState& trial, const MazeLayout& layout, double home_radius, StepEvents& events) {
  bool inside = norm(trial.pose.position() - layout.home.position()) < home_radius;
  if (inside && !trial.at_home) {
    if (trial.phase == Phase::kReturning && !trial.visits.empty()) {
      trial.visits.back().returned_home = true;
      trial.phase = Phase::kOutbound;
      events.home_return = true;
    }
    if (std::any_of(trial.door_states.begin(), trial.door_states.end(), [](auto v) { return v != 0; }))
      events.doors_reset = true;
    std::fill(trial.door_states.begin(), trial.door_states.end(), 0);
    std::fill(trial.trigger_entered.begin(), trial.trigger_entered.end(), 0);
  }
  trial.at_home = inside;
}

double compute_fitness(const FitnessCounters& c) {
  double portion = c.path_visits > 0 ? static_cast<double>(c.returned_visits) / c.path_visits : 0.0;
  return c.rewards_obtained + portion - 0.2 * c.num_repeats;
}

FitnessCounters TrialSummary::counters() const {
  FitnessCounters c;
  c.rewards_obtained = static_cast<int>(rewards_obtained.size());
  c.path_visits = static_cast<int>(visits.size());
  c.returned_visits = static_cast<int>(std::count_if(visits.begin(), visits.end(), [](const PathVisit& v) {
    return v.returned_home;
  }));
  c.num_repeats = num_repeats;
  return c;
}

// ---------------------------------------------------------------------------

RnnController::RnnController(WeightSet weights, const RobotBody& body, AblationSpec ablation, double leak)
    : base_(std::move(weights)), work_(base_), body_(body), ablation_(ablation), leak_(leak) {
  state_.leak = leak_;
}

void RnnController::reset(std::uint64_t trial_seed) {
  state_ = RnnState{};
  state_.leak = leak_;
  rng_ = Rng(derive_seed({trial_seed, kStreamAblation}));
  work_ = base_;
}

WheelSpeeds RnnController::act(const SensorFrame& frame, const Pose&) {
  if (ablation_.target == AblationTarget::kNone) {
    state_ = rnn_step(state_, frame.values, base_);
    return motor_output(state_, base_.output, body_);
  }
  SensorFrame shuffled = frame;
  switch (ablation_.target) {
    case AblationTarget::kInputWeights: work_.input = base_.input; break;
    case AblationTarget::kRecurrentWeights: work_.recurrent = base_.recurrent; break;
    case AblationTarget::kOutputWeights: work_.output = base_.output; break;
    default: break;
  }
  apply_ablation(ablation_, shuffled, work_, rng_);
  state_ = rnn_step(state_, shuffled.values, work_);
  return motor_output(state_, work_.output, body_);
}

// ---------------------------------------------------------------------------

Pose start_pose(const Environment& env, std::uint64_t seed) {
  Rng rng(derive_seed({seed, kStreamStart}));
  const auto& tc = env.trial;
  Pose p = env.layout.home;
  double jx = tc.start_jitter_position > 0 ? rng.uniform(-tc.start_jitter_position, tc.start_jitter_position) : 0.0;
  double jy = tc.start_jitter_position > 0 ? rng.uniform(-tc.start_jitter_position, tc.start_jitter_position) : 0.0;
  double jh = tc.start_jitter_heading > 0 ? rng.uniform(-tc.start_jitter_heading, tc.start_jitter_heading) : 0.0;
  p.x += jx;
  p.y += jy;
  p.heading = normalize_angle(p.heading + jh);
  return resolve_collision(p, env.body, env.layout, env.layout.all_open());
}

namespace {

TrialSummary simulate(Controller& controller, const Environment& env, std::uint64_t seed,
                      std::vector<LogRow>* rows) {
  const auto& layout = env.layout;
  const auto& body = env.body;
  const double dt = body.control_dt;
  TrialState st = initial_state(layout, start_pose(env, seed), seed);
  st.at_home = norm(st.pose.position() - layout.home.position()) < env.trial.home_radius;
  controller.reset(seed);
  std::vector<Segment> obs = obstacles(layout, st.door_states);
  bool completed = false;
  int elapsed = 0;

  for (int step = 0; step < env.trial.timeout_steps; ++step) {
    SensorFrame frame =
        sense(st.pose, st.prev_velocity, st.velocity, layout, st.door_states, body.body_radius, dt, env.sensors);
    WheelSpeeds cmd = controller.act(frame, st.pose);
    WheelSpeeds oa = obstacle_avoidance(frame.proximity(), env.avoidance);
    WheelSpeeds wheels{std::clamp(cmd.left + oa.left, body.min_wheel_speed, body.max_wheel_speed),
                       std::clamp(cmd.right + oa.right, body.min_wheel_speed, body.max_wheel_speed)};
    Pose before = st.pose;
    Pose moved = step_kinematics(before, wheels, body, dt);
    moved = resolve_collision(moved, body.body_radius, obs);

    st.prev_velocity = st.velocity;
    st.velocity = (1.0 / dt) * (moved.position() - before.position());
    st.pose = moved;
    st.step = step;

    StepEvents ev;
    update_doors(st, layout, ev);
    check_reward(st, layout, ev);
    check_home(st, layout, env.trial.home_radius, ev);
    if (ev.doors_changed()) obs = obstacles(layout, st.door_states);

    if (rows) {
      LogRow row;
      row.step = step;
      row.pose = before;
      row.inputs = frame.values;
      auto act = controller.activity();
      std::copy_n(act.begin(), std::min<std::size_t>(act.size(), kHiddenCount), row.activity.begin());
      row.motor = wheels;
      row.event = ev.to_string();
      rows->push_back(std::move(row));
    }
    elapsed = step + 1;
    if (!layout.rewards.empty() && st.rewards_obtained.size() == layout.rewards.size() && !st.visits.empty() &&
        st.visits.back().returned_home) {
      completed = true;
      break;
    }
  }

  TrialSummary s;
  s.elapsed_steps = elapsed;
  s.rewards_obtained = st.rewards_obtained;
  s.visits = st.visits;
  s.num_repeats = st.num_repeats;
  s.completed = completed;
  s.fitness = compute_fitness(s.counters());
  return s;
}

}  // namespace

TrialLog run_trial(Controller& controller, const Environment& env, std::uint64_t seed) {
  TrialLog log;
  log.rows.reserve(static_cast<std::size_t>(env.trial.timeout_steps));
  log.summary = simulate(controller, env, seed, &log.rows);
  log.meta.seed = seed;
  return log;
}

TrialSummary run_trial_summary(Controller& controller, const Environment& env, std::uint64_t seed) {
  return simulate(controller, env, seed, nullptr);
}

TrialLog run_genotype_trial(const Genotype& g, const Environment& env, std::uint64_t seed, AblationSpec ablation) {
  RnnController c(decode_genotype(g), env.body, ablation, env.rnn_leak);
  TrialLog log = run_trial(c, env, seed);
  log.meta.agent = hex64(genotype_hash(g));
  log.meta.ablation = ablation_name(ablation.target);
  return log;
}

TrialSummary run_genotype_summary(const Genotype& g, const Environment& env, std::uint64_t seed,
                                  AblationSpec ablation) {
  RnnController c(decode_genotype(g), env.body, ablation, env.rnn_leak);
  return run_trial_summary(c, env, seed);
}

// ---------------------------------------------------------------------------
// Log files

namespace {

constexpr std::size_t kLogColumns = 4 + kInputCount + kHiddenCount + 3;

std::string csv_header() {
  std::string h = "step,x,y,heading";
  for (int i = 0; i < kInputCount; ++i) h += ",in_" + std::to_string(i);
  for (int i = 0; i < kHiddenCount; ++i) h += ",r_" + std::to_string(i);
  h += ",motor_l,motor_r,event";
  return h;
}

std::string visits_to_string(const std::vector<PathVisit>& visits) {
  std::string out;
  for (const auto& v : visits) {
    if (!out.empty()) out += ' ';
    out += std::to_string(v.path) + ":" + (v.returned_home ? "1" : "0") + ":" + std::to_string(v.step);
  }
  return out;
}

}  // namespace

std::string serialize_log_csv(const TrialLog& log) {
  std::string out;
  out.reserve(log.rows.size() * 2400 + 4096);
  out += "# tmaze-triallog v1 config_hash=" + log.meta.config_hash + " version=" + std::string(kCodeVersion) + "\n";
  out += csv_header();
  out += '\n';
  for (const auto& r : log.rows) {
    out += std::to_string(r.step);
    for (double v : {r.pose.x, r.pose.y, r.pose.heading}) {
      out += ',';
      out += format_double(v);
    }
    for (double v : r.inputs) {
      out += ',';
      out += format_double(v);
    }
    for (double v : r.activity) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += format_double(r.motor.left);
    out += ',';
    out += format_double(r.motor.right);
    out += ',';
    out += r.event;
    out += '\n';
  }
  return out;
}

std::string serialize_summary(const TrialLog& log) {
  const auto& s = log.summary;
  std::ostringstream o;
  o << "tmaze-trial-summary v1\n";
  o << "config_hash " << log.meta.config_hash << "\n";
  o << "version " << kCodeVersion << "\n";
  o << "agent " << (log.meta.agent.empty() ? "-" : log.meta.agent) << "\n";
  o << "seed " << log.meta.seed << "\n";
  o << "ablation " << log.meta.ablation << "\n";
  o << "fitness " << format_double(s.fitness) << "\n";
  o << "elapsed_steps " << s.elapsed_steps << "\n";
  o << "completed " << (s.completed ? "true" : "false") << "\n";
  o << "num_repeats " << s.num_repeats << "\n";
  o << "rewards_obtained";
  for (int r : s.rewards_obtained) o << ' ' << r;
  o << "\n";
  o << "visits " << visits_to_string(s.visits) << "\n";
  return o.str();
}

TrialLog parse_log(std::string_view csv, std::string_view summary, std::string_view source) {
  TrialLog log;
  const std::string src(source);

  // Summary sidecar.
  int line_no = 0;
  bool header = false;
  for (auto line : split(summary, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::string where = src + ".summary:" + std::to_string(line_no);
    if (!header) {
      if (line != "tmaze-trial-summary v1") throw Error(ErrorCode::kParse, where + ": bad summary header");
      header = true;
      continue;
    }
    auto sp = line.find(' ');
    std::string_view key = line.substr(0, sp);
    std::string_view val = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp + 1));
    if (key == "config_hash") log.meta.config_hash = std::string(val);
    else if (key == "version") continue;
    else if (key == "agent") log.meta.agent = val == "-" ? "" : std::string(val);
    else if (key == "seed") log.meta.seed = parse_u64(val, where);
    else if (key == "ablation") log.meta.ablation = std::string(val);
    else if (key == "fitness") log.summary.fitness = parse_double(val, where);
    else if (key == "elapsed_steps") log.summary.elapsed_steps = static_cast<int>(parse_int(val, where));
    else if (key == "completed") log.summary.completed = parse_bool(val, where);
    else if (key == "num_repeats") log.summary.num_repeats = static_cast<int>(parse_int(val, where));
    else if (key == "rewards_obtained") {
      for (auto t : split_ws(val)) log.summary.rewards_obtained.push_back(static_cast<int>(parse_int(t, where)));
    } else if (key == "visits") {
      for (auto t : split_ws(val)) {
        auto parts = split(t, ':');
        if (parts.size() != 3) throw Error(ErrorCode::kParse, where + ": visit must be path:returned:step");
        log.summary.visits.push_back({static_cast<int>(parse_int(parts[0], where)), parse_bool(parts[1], where),
                                      static_cast<int>(parse_int(parts[2], where))});
      }
    } else {
      throw Error(ErrorCode::kParse, where + ": unknown summary key '" + std::string(key) + "'");
    }
  }
  if (!header) throw Error(ErrorCode::kParse, src + ".summary: empty summary");

  // Per-step rows.
  line_no = 0;
  bool seen_header = false;
  const std::string expected_header = csv_header();
  for (auto line : split(csv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::string where = src + ":" + std::to_string(line_no);
    if (line.starts_with("#")) {
      auto pos = line.find("config_hash=");
      if (pos != std::string_view::npos) {
        auto rest = line.substr(pos + 12);
        auto hash = rest.substr(0, rest.find(' '));
        if (!log.meta.config_hash.empty() && hash != log.meta.config_hash)
          throw Error(ErrorCode::kMixedHash, where + ": log and summary disagree on config hash");
      }
      continue;
    }
    if (!seen_header) {
      if (line != expected_header) throw Error(ErrorCode::kParse, where + ": unexpected column header");
      seen_header = true;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() != kLogColumns)
      throw Error(ErrorCode::kParse, where + ": expected " + std::to_string(kLogColumns) + " columns, got " +
                                         std::to_string(f.size()));
    LogRow r;
    std::size_t c = 0;
    r.step = static_cast<int>(parse_int(f[c++], where));
    r.pose.x = parse_double(f[c++], where);
    r.pose.y = parse_double(f[c++], where);
    r.pose.heading = parse_double(f[c++], where);
    for (auto& v : r.inputs) v = parse_double(f[c++], where);
    for (auto& v : r.activity) v = parse_double(f[c++], where);
    r.motor.left = parse_double(f[c++], where);
    r.motor.right = parse_double(f[c++], where);
    r.event = std::string(f[c++]);
    log.rows.push_back(std::move(r));
  }
  if (!seen_header) throw Error(ErrorCode::kParse, src + ": missing column header");
  if (static_cast<int>(log.rows.size()) != log.summary.elapsed_steps)
    throw Error(ErrorCode::kParse, src + ": row count " + std::to_string(log.rows.size()) +
                                       " does not match elapsed_steps " + std::to_string(log.summary.elapsed_steps));
  return log;
}

void write_log(const std::filesystem::path& dir, const std::string& stem, const TrialLog& log) {
  write_file(dir / (stem + ".csv"), serialize_log_csv(log));
  write_file(dir / (stem + ".summary"), serialize_summary(log));
}

TrialLog read_log(const std::filesystem::path& csv_path) {
  auto summary_path = csv_path;
  summary_path.replace_extension(".summary");
  return parse_log(read_file(csv_path), read_file(summary_path), csv_path.string());
}

std::vector<TrialLog> read_log_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::kMissingInput, "log directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<TrialLog> logs;
  for (const auto& f : files) logs.push_back(read_log(f));
  return logs;
}

}  // namespace tmaze
