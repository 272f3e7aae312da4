#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmaze/maze.hpp"
#include "tmaze/random.hpp"
#include "tmaze/sensors.hpp"

namespace tmaze {

inline constexpr int kHiddenCount = 50;
inline constexpr int kOutputCount = 2;
inline constexpr std::size_t kInputWeightCount = kInputCount * kHiddenCount;        // 4550
inline constexpr std::size_t kRecurrentWeightCount = kHiddenCount * kHiddenCount;   // 2500
inline constexpr std::size_t kOutputWeightCount = kHiddenCount * kOutputCount;      // 100
inline constexpr std::size_t kGenotypeLength =
    kInputWeightCount + kRecurrentWeightCount + kOutputWeightCount;                 // 7150
inline constexpr double kDefaultLeak = 0.01;

/// Flat gene vector laid out as [W_xr 91x50 | W_rr 50x50 | W_ry 50x2], each
/// block row-major with the source neuron as the row.
struct Genotype {
  std::vector<double> genes;

  Genotype() = default;
  explicit Genotype(std::vector<double> g) : genes(std::move(g)) {}
  static Genotype zeros() { return Genotype(std::vector<double>(kGenotypeLength, 0.0)); }
  friend bool operator==(const Genotype&, const Genotype&) = default;
};

struct WeightSet {
  std::vector<double> input = std::vector<double>(kInputWeightCount, 0.0);      // [k * 50 + i]
  std::vector<double> recurrent = std::vector<double>(kRecurrentWeightCount, 0.0);  // [j * 50 + i]
  std::vector<double> output = std::vector<double>(kOutputWeightCount, 0.0);    // [j * 2 + m]

  double& w_xr(int k, int i) { return input[static_cast<std::size_t>(k * kHiddenCount + i)]; }
  double w_xr(int k, int i) const { return input[static_cast<std::size_t>(k * kHiddenCount + i)]; }
  double& w_rr(int j, int i) { return recurrent[static_cast<std::size_t>(j * kHiddenCount + i)]; }
  double w_rr(int j, int i) const { return recurrent[static_cast<std::size_t>(j * kHiddenCount + i)]; }
  double& w_ry(int j, int m) { return output[static_cast<std::size_t>(j * kOutputCount + m)]; }
  double w_ry(int j, int m) const { return output[static_cast<std::size_t>(j * kOutputCount + m)]; }

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

/// Throws Error(kBadLength) unless the genotype has exactly 7150 genes.
WeightSet decode_genotype(const Genotype& g);
Genotype encode_genotype(const WeightSet& w);

struct RnnState {
  std::array<double, kHiddenCount> activity{};
  double leak = kDefaultLeak;
};

/// One recurrent update: R_i <- (1 - p) tanh(synIn_i) + p R_i, where synIn_i sums
/// the weighted inputs and the weighted activity of every other neuron (the
/// W_rr diagonal is stored but never read).
RnnState rnn_step(const RnnState& state, std::span<const double, kInputCount> inputs, const WeightSet& w);

/// Raw R^T W_ry clamped into the wheel-speed range.
WheelSpeeds motor_output(const RnnState& state, std::span<const double> output_weights, const RobotBody& body);

struct AvoidanceConfig {
  double threshold = 0.8;     // activates when any reading exceeds this
  double gain = 1.0;          // rad/s per unit of left/right imbalance
  double escape_speed = 1.0;  // rad/s backing off when both front sensors exceed the threshold
};

/// Reflexive near-contact correction added to the network's wheel command.
/// Positive imbalance (more contact on the left) speeds the left wheel and slows
/// the right one, turning away from the contact.
WheelSpeeds obstacle_avoidance(std::span<const double, kProximityCount> proximity, const AvoidanceConfig& cfg);

enum class AblationTarget {
  kNone,
  kProximity,
  kAccelerometer,
  kVision,
  kInputWeights,
  kRecurrentWeights,
  kOutputWeights,
};
inline constexpr std::array<AblationTarget, 7> kAllAblations = {
    AblationTarget::kNone,         AblationTarget::kProximity,       AblationTarget::kAccelerometer,
    AblationTarget::kVision,       AblationTarget::kInputWeights,    AblationTarget::kRecurrentWeights,
    AblationTarget::kOutputWeights,
};

const char* ablation_name(AblationTarget t);
AblationTarget parse_ablation(std::string_view name);

struct AblationSpec {
  AblationTarget target = AblationTarget::kNone;
};

/// Shuffles one sensor group or one weight matrix with a fresh uniform
/// permutation; everything else is passed through untouched.
void apply_ablation(const AblationSpec& spec, SensorFrame& frame, WeightSet& weights, Rng& rng);

/// `note`, when given, is written as a '#' line after the header; parsing skips such lines.
std::string serialize_genotype(const Genotype& g, std::string_view note = {});
Genotype parse_genotype(std::string_view text, std::string_view source = "<genotype>");
Genotype load_genotype(const std::string& path);
void save_genotype(const std::string& path, const Genotype& g, std::string_view note = {});
std::uint64_t genotype_hash(const Genotype& g);

}  // namespace tmaze
