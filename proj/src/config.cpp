#include "tmaze/config.hpp"

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "tmaze/error.hpp"
#include "tmaze/text_io.hpp"

namespace tmaze {

namespace {

std::string freeze_to_string(const EvolutionConfig& e) {
  std::vector<std::string> parts;
  if (e.freeze_input) parts.emplace_back("input");
  if (e.freeze_recurrent) parts.emplace_back("recurrent");
  if (e.freeze_output) parts.emplace_back("output");
  if (parts.empty()) return "none";
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

void freeze_from_string(EvolutionConfig& e, std::string_view v, const std::string& where) {
  e.freeze_input = e.freeze_recurrent = e.freeze_output = false;
  if (v == "none") return;
  for (auto part : split(v, ',')) {
    part = trim(part);
    if (part == "input") e.freeze_input = true;
    else if (part == "recurrent") e.freeze_recurrent = true;
    else if (part == "output") e.freeze_output = true;
    else throw Error(ErrorCode::kConfig, where + ": unknown block '" + std::string(part) + "' (input, recurrent, output, none)");
  }
}

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view, const std::string&)> set;
};

template <typename T>
Field real(T ExperimentConfig::*section, double T::*member) {
  return {[=](const ExperimentConfig& c) { return format_double(c.*section.*member); },
          [=](ExperimentConfig& c, std::string_view v, const std::string& w) { c.*section.*member = parse_double(v, w); }};
}

template <typename T>
Field integer(T ExperimentConfig::*section, int T::*member) {
  return {[=](const ExperimentConfig& c) { return std::to_string(c.*section.*member); },
          [=](ExperimentConfig& c, std::string_view v, const std::string& w) {
            c.*section.*member = static_cast<int>(parse_int(v, w));
          }};
}

template <typename T>
Field boolean(T ExperimentConfig::*section, bool T::*member) {
  return {[=](const ExperimentConfig& c) { return std::string(c.*section.*member ? "true" : "false"); },
          [=](ExperimentConfig& c, std::string_view v, const std::string& w) { c.*section.*member = parse_bool(v, w); }};
}

/// Key table in canonical order.
const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"maze.layout",
       {[](const C& c) { return c.layout; },
        [](C& c, std::string_view v, const std::string&) { c.layout = std::string(v); }}},
      {"robot.body_radius", real(&C::robot, &RobotBody::body_radius)},
      {"robot.wheel_radius", real(&C::robot, &RobotBody::wheel_radius)},
      {"robot.axle_length", real(&C::robot, &RobotBody::axle_length)},
      {"robot.min_wheel_speed", real(&C::robot, &RobotBody::min_wheel_speed)},
      {"robot.max_wheel_speed", real(&C::robot, &RobotBody::max_wheel_speed)},
      {"robot.control_dt", real(&C::robot, &RobotBody::control_dt)},
      {"sensors.proximity_range", real(&C::sensors, &SensorConfig::proximity_range)},
      {"sensors.accel_norm", real(&C::sensors, &SensorConfig::accel_norm)},
      {"sensors.gravity", real(&C::sensors, &SensorConfig::gravity)},
      {"sensors.camera_range", real(&C::sensors, &SensorConfig::camera_range)},
      {"sensors.camera_fov_deg", real(&C::sensors, &SensorConfig::camera_fov_deg)},
      {"rnn.inputs",
       {[](const C&) { return std::to_string(kInputCount); },
        [](C&, std::string_view v, const std::string& w) {
          if (parse_int(v, w) != kInputCount) throw Error(ErrorCode::kConfig, w + ": rnn.inputs is fixed at 91");
        }}},
      {"rnn.hidden",
       {[](const C&) { return std::to_string(kHiddenCount); },
        [](C&, std::string_view v, const std::string& w) {
          if (parse_int(v, w) != kHiddenCount) throw Error(ErrorCode::kConfig, w + ": rnn.hidden is fixed at 50");
        }}},
      {"rnn.outputs",
       {[](const C&) { return std::to_string(kOutputCount); },
        [](C&, std::string_view v, const std::string& w) {
          if (parse_int(v, w) != kOutputCount) throw Error(ErrorCode::kConfig, w + ": rnn.outputs is fixed at 2");
        }}},
      {"rnn.leak",
       {[](const C& c) { return format_double(c.rnn_leak); },
        [](C& c, std::string_view v, const std::string& w) { c.rnn_leak = parse_double(v, w); }}},
      {"avoidance.threshold", real(&C::avoidance, &AvoidanceConfig::threshold)},
      {"avoidance.gain", real(&C::avoidance, &AvoidanceConfig::gain)},
      {"avoidance.escape_speed", real(&C::avoidance, &AvoidanceConfig::escape_speed)},
      {"trial.timeout_steps", integer(&C::trial, &TrialConfig::timeout_steps)},
      {"trial.home_radius", real(&C::trial, &TrialConfig::home_radius)},
      {"trial.start_jitter_position", real(&C::trial, &TrialConfig::start_jitter_position)},
      {"trial.start_jitter_heading", real(&C::trial, &TrialConfig::start_jitter_heading)},
      {"evolution.population_size", integer(&C::evolution, &EvolutionConfig::population_size)},
      {"evolution.generations", integer(&C::evolution, &EvolutionConfig::generations)},
      {"evolution.trials_per_genotype", integer(&C::evolution, &EvolutionConfig::trials_per_genotype)},
      {"evolution.elite_fraction", real(&C::evolution, &EvolutionConfig::elite_fraction)},
      {"evolution.mutation_rate", real(&C::evolution, &EvolutionConfig::mutation_rate)},
      {"evolution.mutation_std_base", real(&C::evolution, &EvolutionConfig::mutation_std_base)},
      {"evolution.mutation_std_halflife", real(&C::evolution, &EvolutionConfig::mutation_std_halflife)},
      {"evolution.init_std", real(&C::evolution, &EvolutionConfig::init_std)},
      {"evolution.master_seed",
       {[](const C& c) { return std::to_string(c.evolution.master_seed); },
        [](C& c, std::string_view v, const std::string& w) { c.evolution.master_seed = parse_u64(v, w); }}},
      {"evolution.reevaluate_elites", boolean(&C::evolution, &EvolutionConfig::reevaluate_elites)},
      {"evolution.freeze_mask",
       {[](const C& c) { return freeze_to_string(c.evolution); },
        [](C& c, std::string_view v, const std::string& w) { freeze_from_string(c.evolution, v, w); }}},
      {"analysis.bin_width", real(&C::analysis, &AnalysisConfig::bin_width)},
      {"analysis.bin_height", real(&C::analysis, &AnalysisConfig::bin_height)},
      {"analysis.build_trials", integer(&C::analysis, &AnalysisConfig::build_trials)},
      {"analysis.test_trials", integer(&C::analysis, &AnalysisConfig::test_trials)},
      {"analysis.ablation_trials", integer(&C::analysis, &AnalysisConfig::ablation_trials)},
      {"analysis.ablation_alpha", real(&C::analysis, &AnalysisConfig::ablation_alpha)},
      {"analysis.transition_threshold", real(&C::analysis, &AnalysisConfig::transition_threshold)},
      {"run.output_dir",
       {[](const C& c) { return c.run.output_dir; },
        [](C& c, std::string_view v, const std::string&) { c.run.output_dir = std::string(v); }}},
      {"run.demo_trials", integer(&C::run, &RunConfig::demo_trials)},
      {"run.keep_all_checkpoints", boolean(&C::run, &RunConfig::keep_all_checkpoints)},
  };
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (layout.empty()) fail("maze.layout must not be empty");
  if (!(robot.body_radius > 0)) fail("robot.body_radius must be positive");
  if (!(robot.wheel_radius > 0)) fail("robot.wheel_radius must be positive");
  if (!(robot.axle_length > 0)) fail("robot.axle_length must be positive");
  if (!(robot.min_wheel_speed <= robot.max_wheel_speed)) fail("robot.min_wheel_speed must not exceed max_wheel_speed");
  if (!(robot.control_dt > 0)) fail("robot.control_dt must be positive");
  if (!(sensors.proximity_range > 0)) fail("sensors.proximity_range must be positive");
  if (!(sensors.accel_norm > 0)) fail("sensors.accel_norm must be positive");
  if (!(sensors.camera_range > 0)) fail("sensors.camera_range must be positive");
  if (!(sensors.camera_fov_deg > 0 && sensors.camera_fov_deg < 180)) fail("sensors.camera_fov_deg must lie in (0, 180)");
  if (!(rnn_leak >= 0 && rnn_leak <= 1)) fail("rnn.leak must lie in [0, 1]");
  if (!(avoidance.threshold >= 0 && avoidance.threshold <= 1)) fail("avoidance.threshold must lie in [0, 1]");
  if (trial.timeout_steps < 1) fail("trial.timeout_steps must be positive");
  if (!(trial.home_radius > 0)) fail("trial.home_radius must be positive");
  if (!(trial.start_jitter_position >= 0) || !(trial.start_jitter_heading >= 0)) fail("trial jitter must be non-negative");
  evolution.validate();
  if (!(analysis.bin_width > 0) || !(analysis.bin_height > 0)) fail("analysis bin sizes must be positive");
  if (analysis.build_trials < 1 || analysis.test_trials < 1) fail("analysis.build_trials and test_trials must be positive");
  if (analysis.ablation_trials < 1) fail("analysis.ablation_trials must be positive");
  if (!(analysis.ablation_alpha > 0 && analysis.ablation_alpha < 1)) fail("analysis.ablation_alpha must lie in (0, 1)");
  if (!(analysis.transition_threshold >= 0 && analysis.transition_threshold <= 1))
    fail("analysis.transition_threshold must lie in [0, 1]");
  if (run.demo_trials < 1) fail("run.demo_trials must be positive");
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  std::map<std::string_view, const Field*> index;
  for (const auto& [k, f] : fields()) index[k] = &f;
  ExperimentConfig cfg;
  std::set<std::string> seen;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::kConfig, where + ": expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw Error(ErrorCode::kConfig, where + ": unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second)
      throw Error(ErrorCode::kConfig, where + ": key '" + std::string(key) + "' given twice");
    if (value.empty()) throw Error(ErrorCode::kConfig, where + ": empty value for '" + std::string(key) + "'");
    try {
      it->second->set(cfg, value, where);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      throw Error(ErrorCode::kConfig, std::string(e.what()) + " (key '" + std::string(key) + "')");
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string(source) + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& [k, f] : fields()) {
    std::string s = k.substr(0, k.find('.'));
    if (s != section) {
      if (!section.empty()) out += '\n';
      section = s;
    }
    out += k + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.run.output_dir.clear();
  c.run.keep_all_checkpoints = false;
  return hex64(fnv1a(serialize_config(c)));
}

Environment make_environment(const ExperimentConfig& cfg) {
  Environment env;
  env.layout = load_layout(cfg.layout);
  env.body = cfg.robot;
  env.sensors = cfg.sensors;
  env.avoidance = cfg.avoidance;
  env.trial = cfg.trial;
  env.rnn_leak = cfg.rnn_leak;
  return env;
}

}  // namespace tmaze
