#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tmaze/kinematics.hpp"
#include "tmaze/maze.hpp"
#include "tmaze/rnn.hpp"
#include "tmaze/sensors.hpp"

namespace tmaze {

struct TrialConfig {
  int timeout_steps = 5000;
  double home_radius = 0.06;
  /// Per-trial start perturbation drawn from the trial seed (uniform, +/-).
  double start_jitter_position = 0.005;
  double start_jitter_heading = 0.1;
};

/// Everything a trial needs besides the controller; immutable and shareable
/// across concurrently running trials.
struct Environment {
  MazeLayout layout;
  RobotBody body;
  SensorConfig sensors;
  AvoidanceConfig avoidance;
  TrialConfig trial;
  double rnn_leak = kDefaultLeak;
};

enum class Phase { kOutbound, kReturning };

struct PathVisit {
  int path = 0;
  bool returned_home = false;
  int step = 0;
  friend bool operator==(const PathVisit&, const PathVisit&) = default;
};

struct TrialState {
  int step = 0;
  Pose pose;
  Vec2 prev_velocity;
  Vec2 velocity;
  std::vector<int> rewards_obtained;  // sorted path ids
  std::vector<PathVisit> visits;
  int num_repeats = 0;
  Phase phase = Phase::kOutbound;
  DoorStates door_states;
  std::vector<std::uint8_t> trigger_entered;
  bool crediting_armed = false;  // set on entering seg1, cleared by a credited visit
  bool at_home = true;
  std::uint64_t rng_seed = 0;

  bool obtained(int path) const;
};

TrialState initial_state(const MazeLayout& layout, const Pose& start, std::uint64_t seed);

/// What changed during one control step.
struct StepEvents {
  std::vector<int> doors_closed;
  int visit_path = 0;
  bool repeat = false;
  bool home_return = false;
  bool doors_reset = false;
  bool armed = false;

  bool doors_changed() const { return !doors_closed.empty() || doors_reset; }
  std::string to_string() const;
};

/// Closes each open door whose trigger the robot has just left through the
/// exit edge. Doors stay closed until the robot re-enters home.
void update_doors(TrialState& trial, const MazeLayout& layout, StepEvents& events);

/// Arms crediting inside seg1 and, when armed, credits the first reward site
/// within its radius as a path visit (novel reward or repeat).
void check_reward(TrialState& trial, const MazeLayout& layout, StepEvents& events);

/// On entering the home disc: marks the pending visit as returned, reopens all doors.
void check_home(TrialState& trial, const MazeLayout& layout, double home_radius, StepEvents& events);

struct FitnessCounters {
  int rewards_obtained = 0;
  int path_visits = 0;
  int returned_visits = 0;
  int num_repeats = 0;
};

/// rewards + returned/visits - 0.2 * repeats; the portion term is 0 without visits.
double compute_fitness(const FitnessCounters& c);

struct TrialSummary {
  double fitness = 0.0;
  int elapsed_steps = 0;
  std::vector<int> rewards_obtained;
  std::vector<PathVisit> visits;
  int num_repeats = 0;
  bool completed = false;

  FitnessCounters counters() const;
  friend bool operator==(const TrialSummary&, const TrialSummary&) = default;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(std::uint64_t trial_seed) = 0;
  /// Wheel command for this step; `pose` is available to scripted controllers.
  virtual WheelSpeeds act(const SensorFrame& frame, const Pose& pose) = 0;
  /// Recurrent activity after the last act(); empty for controllers without one.
  virtual std::span<const double> activity() const { return {}; }
};

class RnnController : public Controller {
 public:
  RnnController(WeightSet weights, const RobotBody& body, AblationSpec ablation = {}, double leak = kDefaultLeak);

  void reset(std::uint64_t trial_seed) override;
  WheelSpeeds act(const SensorFrame& frame, const Pose& pose) override;
  std::span<const double> activity() const override { return state_.activity; }

 private:
  WeightSet base_;
  WeightSet work_;
  RobotBody body_;
  AblationSpec ablation_;
  double leak_;
  RnnState state_;
  Rng rng_{0};
};

struct LogRow {
  int step = 0;
  Pose pose;
  std::array<double, kInputCount> inputs{};
  std::array<double, kHiddenCount> activity{};
  WheelSpeeds motor;
  std::string event;
  friend bool operator==(const LogRow&, const LogRow&) = default;
};

/// Provenance carried into every written artifact.
struct LogMeta {
  std::string config_hash = "0000000000000000";
  std::string agent;  // genotype hash or controller name
  std::uint64_t seed = 0;
  std::string ablation = "none";
  friend bool operator==(const LogMeta&, const LogMeta&) = default;
};

struct TrialLog {
  LogMeta meta;
  std::vector<LogRow> rows;
  TrialSummary summary;
  friend bool operator==(const TrialLog&, const TrialLog&) = default;
};

Pose start_pose(const Environment& env, std::uint64_t seed);

/// Runs one trial: sense, controller, obstacle avoidance, clamp, kinematics,
/// collision, doors, rewards, home. Ends early once every reward has been
/// obtained and home re-entered.
TrialLog run_trial(Controller& controller, const Environment& env, std::uint64_t seed);
/// Same dynamics without recording rows.
TrialSummary run_trial_summary(Controller& controller, const Environment& env, std::uint64_t seed);

TrialLog run_genotype_trial(const Genotype& g, const Environment& env, std::uint64_t seed,
                            AblationSpec ablation = {});
TrialSummary run_genotype_summary(const Genotype& g, const Environment& env, std::uint64_t seed,
                                  AblationSpec ablation = {});

std::string serialize_log_csv(const TrialLog& log);
std::string serialize_summary(const TrialLog& log);
TrialLog parse_log(std::string_view csv, std::string_view summary, std::string_view source = "<log>");

/// Writes `<stem>.csv` and `<stem>.summary` under `dir`.
void write_log(const std::filesystem::path& dir, const std::string& stem, const TrialLog& log);
TrialLog read_log(const std::filesystem::path& csv_path);
/// All logs in a directory, sorted by file name.
std::vector<TrialLog> read_log_dir(const std::filesystem::path& dir);

}  // namespace tmaze
