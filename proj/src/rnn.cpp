#include "tmaze/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tmaze/error.hpp"
#include "tmaze/text_io.hpp"

namespace tmaze {

WeightSet decode_genotype(const Genotype& g) {
  if (g.genes.size() != kGenotypeLength)
    throw Error(ErrorCode::kBadLength,
                "genotype has " + std::to_string(g.genes.size()) + " genes, expected " + std::to_string(kGenotypeLength));
  WeightSet w;
  auto it = g.genes.begin();
  std::copy_n(it, kInputWeightCount, w.input.begin());
  it += static_cast<std::ptrdiff_t>(kInputWeightCount);
  std::copy_n(it, kRecurrentWeightCount, w.recurrent.begin());
  it += static_cast<std::ptrdiff_t>(kRecurrentWeightCount);
  std::copy_n(it, kOutputWeightCount, w.output.begin());
  return w;
}

Genotype encode_genotype(const WeightSet& w) {
  std::vector<double> genes;
  genes.reserve(kGenotypeLength);
  genes.insert(genes.end(), w.input.begin(), w.input.end());
  genes.insert(genes.end(), w.recurrent.begin(), w.recurrent.end());
  genes.insert(genes.end(), w.output.begin(), w.output.end());
  return Genotype(std::move(genes));
}

RnnState rnn_step(const RnnState& state, std::span<const double, kInputCount> inputs, const WeightSet& w) {
  std::array<double, kHiddenCount> syn{};
  for (int k = 0; k < kInputCount; ++k) {
    const double x = inputs[static_cast<std::size_t>(k)];
    if (x == 0.0) continue;
    const double* row = &w.input[static_cast<std::size_t>(k * kHiddenCount)];
    for (int i = 0; i < kHiddenCount; ++i) syn[static_cast<std::size_t>(i)] += row[i] * x;
  }
  for (int j = 0; j < kHiddenCount; ++j) {
    const double rj = state.activity[static_cast<std::size_t>(j)];
    if (rj == 0.0) continue;
    const double* row = &w.recurrent[static_cast<std::size_t>(j * kHiddenCount)];
    for (int i = 0; i < kHiddenCount; ++i)
      if (i != j) syn[static_cast<std::size_t>(i)] += row[i] * rj;
  }
  RnnState next;
  next.leak = state.leak;
  for (std::size_t i = 0; i < kHiddenCount; ++i)
    next.activity[i] = (1.0 - state.leak) * std::tanh(syn[i]) + state.leak * state.activity[i];
  return next;
}

WheelSpeeds motor_output(const RnnState& state, std::span<const double> output_weights, const RobotBody& body) {
  double raw[kOutputCount] = {0.0, 0.0};
  for (std::size_t j = 0; j < kHiddenCount; ++j)
    for (std::size_t m = 0; m < kOutputCount; ++m) raw[m] += state.activity[j] * output_weights[j * kOutputCount + m];
  return {std::clamp(raw[0], body.min_wheel_speed, body.max_wheel_speed),
          std::clamp(raw[1], body.min_wheel_speed, body.max_wheel_speed)};
}

WheelSpeeds obstacle_avoidance(std::span<const double, kProximityCount> p, const AvoidanceConfig& cfg) {
  double peak = *std::max_element(p.begin(), p.end());
  if (!(peak > cfg.threshold)) return {};
  double right = p[0] + p[1] + p[2] + p[3];
  double left = p[4] + p[5] + p[6] + p[7];
  double delta = cfg.gain * (left - right);
  WheelSpeeds out{delta, -delta};
  if (p[0] > cfg.threshold && p[7] > cfg.threshold) {
    out.left -= cfg.escape_speed;
    out.right -= cfg.escape_speed;
  }
  return out;
}

const char* ablation_name(AblationTarget t) {
  switch (t) {
    case AblationTarget::kNone: return "none";
    case AblationTarget::kProximity: return "proximity";
    case AblationTarget::kAccelerometer: return "accelerometer";
    case AblationTarget::kVision: return "vision";
    case AblationTarget::kInputWeights: return "input_weights";
    case AblationTarget::kRecurrentWeights: return "recurrent_weights";
    case AblationTarget::kOutputWeights: return "output_weights";
  }
  return "none";
}

AblationTarget parse_ablation(std::string_view name) {
  for (auto t : kAllAblations)
    if (name == ablation_name(t)) return t;
  throw Error(ErrorCode::kParse, "unknown ablation target '" + std::string(name) + "'");
}

void apply_ablation(const AblationSpec& spec, SensorFrame& frame, WeightSet& weights, Rng& rng) {
  switch (spec.target) {
    case AblationTarget::kNone: return;
    case AblationTarget::kProximity: rng.shuffle(std::span<double>(frame.proximity())); return;
    case AblationTarget::kAccelerometer: rng.shuffle(std::span<double>(frame.accel())); return;
    case AblationTarget::kVision: rng.shuffle(std::span<double>(frame.pixels())); return;
    case AblationTarget::kInputWeights: rng.shuffle(std::span<double>(weights.input)); return;
    case AblationTarget::kRecurrentWeights: rng.shuffle(std::span<double>(weights.recurrent)); return;
    case AblationTarget::kOutputWeights: rng.shuffle(std::span<double>(weights.output)); return;
  }
}

// ---------------------------------------------------------------------------
// Genotype file: header line, then one gene per line.

std::string serialize_genotype(const Genotype& g, std::string_view note) {
  std::string out = "tmaze-genotype v1 " + std::to_string(g.genes.size()) + "\n";
  if (!note.empty()) out += "# " + std::string(note) + "\n";
  out.reserve(out.size() + g.genes.size() * 24);
  for (double v : g.genes) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

Genotype parse_genotype(std::string_view text, std::string_view source) {
  auto lines = split(text, '\n');
  std::size_t li = 0;
  auto next_line = [&]() -> std::string_view {
    while (li < lines.size()) {
      auto t = trim(lines[li++]);
      if (!t.empty() && !t.starts_with('#')) return t;
    }
    return {};
  };
  auto header = split_ws(next_line());
  if (header.size() != 3 || header[0] != "tmaze-genotype" || header[1] != "v1")
    throw Error(ErrorCode::kParse, std::string(source) + ":1: expected header 'tmaze-genotype v1 <count>'");
  auto count = parse_int(header[2], std::string(source) + ":1");
  if (count != static_cast<long long>(kGenotypeLength))
    throw Error(ErrorCode::kBadLength, std::string(source) + ": header declares " + std::to_string(count) +
                                           " genes, expected " + std::to_string(kGenotypeLength));
  Genotype g;
  g.genes.reserve(kGenotypeLength);
  while (li < lines.size()) {
    auto t = trim(lines[li]);
    ++li;
    if (t.empty() || t.starts_with('#')) continue;
    double v = parse_double(t, std::string(source) + ":" + std::to_string(li));
    if (!std::isfinite(v))
      throw Error(ErrorCode::kParse, std::string(source) + ":" + std::to_string(li) + ": gene is not finite");
    g.genes.push_back(v);
  }
  if (g.genes.size() != kGenotypeLength)
    throw Error(ErrorCode::kBadLength, std::string(source) + ": found " + std::to_string(g.genes.size()) +
                                           " genes, expected " + std::to_string(kGenotypeLength));
  return g;
}

Genotype load_genotype(const std::string& path) { return parse_genotype(read_file(path), path); }

void save_genotype(const std::string& path, const Genotype& g, std::string_view note) {
  write_file(path, serialize_genotype(g, note));
}

std::uint64_t genotype_hash(const Genotype& g) {
  std::string_view bytes(reinterpret_cast<const char*>(g.genes.data()), g.genes.size() * sizeof(double));
  return fnv1a(bytes);
}

}  // namespace tmaze
