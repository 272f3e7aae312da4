#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "support.hpp"
#include "tmaze/error.hpp"
#include "tmaze/kinematics.hpp"
#include "tmaze/rnn.hpp"

using namespace tmaze;
using tmaze::testing::random_genotype;

namespace {

std::array<double, kInputCount> random_inputs(Rng& rng) {
  std::array<double, kInputCount> x{};
  for (double& v : x) v = rng.uniform(-1.0, 1.5);
  return x;
}

// Scalar evaluation of the update for neuron i, written from the definition.
double reference_update(const RnnState& s, const std::array<double, kInputCount>& x, const WeightSet& w, int i) {
  double syn = 0.0;
  for (int k = 0; k < kInputCount; ++k) syn += x[k] * w.w_xr(k, i);
  for (int j = 0; j < kHiddenCount; ++j)
    if (j != i) syn += s.activity[j] * w.w_rr(j, i);
  return (1.0 - s.leak) * std::tanh(syn) + s.leak * s.activity[i];
}

}  // namespace

TEST_CASE("gene count") {
  CHECK(kGenotypeLength == 7150);
  CHECK(kInputWeightCount + kRecurrentWeightCount + kOutputWeightCount == 91 * 50 + 50 * 50 + 50 * 2);
  CHECK_NOTHROW(decode_genotype(Genotype::zeros()));
}

TEST_CASE("decode rejects wrong lengths") {
  for (std::size_t n : {0UL, 7100UL, 7149UL, 7151UL}) {
    try {
      decode_genotype(Genotype(std::vector<double>(n, 0.0)));
      FAIL("expected BAD_LENGTH");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBadLength);
    }
  }
}

TEST_CASE("decode block layout") {
  std::vector<double> genes(kGenotypeLength);
  std::iota(genes.begin(), genes.end(), 0.0);
  WeightSet w = decode_genotype(Genotype(genes));
  CHECK(w.w_xr(0, 0) == 0.0);
  CHECK(w.w_xr(0, 1) == 1.0);
  CHECK(w.w_xr(1, 0) == 50.0);
  CHECK(w.w_xr(90, 49) == 4549.0);
  CHECK(w.w_rr(0, 0) == 4550.0);
  CHECK(w.w_rr(49, 49) == 7049.0);
  CHECK(w.w_ry(0, 0) == 7050.0);
  CHECK(w.w_ry(0, 1) == 7051.0);
  CHECK(w.w_ry(49, 1) == 7149.0);
  CHECK(encode_genotype(w).genes == genes);
}

TEST_CASE("encode/decode round trip") {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    Genotype g = random_genotype(rng, 2.0);
    WeightSet w = decode_genotype(g);
    CHECK(encode_genotype(w) == g);
    CHECK(decode_genotype(encode_genotype(w)) == w);
  }
}

TEST_CASE("leak-only dynamics") {
  WeightSet w;
  std::array<double, kInputCount> x{};
  RnnState s;
  s.activity.fill(1.0);
  RnnState n = rnn_step(s, x, w);
  for (double v : n.activity) CHECK(v == doctest::Approx(0.01).epsilon(1e-15));
  // ||R(t)|| = 0.01^t ||R(0)||
  Rng rng(2);
  for (double& v : s.activity) v = rng.uniform(-1, 1);
  double norm0 = std::sqrt(std::inner_product(s.activity.begin(), s.activity.end(), s.activity.begin(), 0.0));
  RnnState cur = s;
  for (int t = 1; t <= 5; ++t) {
    cur = rnn_step(cur, x, w);
    double nt = std::sqrt(std::inner_product(cur.activity.begin(), cur.activity.end(), cur.activity.begin(), 0.0));
    CHECK(nt == doctest::Approx(std::pow(0.01, t) * norm0).epsilon(1e-12));
  }
}

TEST_CASE("zero is a fixed point") {
  Rng rng(5);
  WeightSet w = decode_genotype(random_genotype(rng));
  RnnState s;
  std::array<double, kInputCount> x{};
  RnnState n = rnn_step(s, x, w);
  for (double v : n.activity) CHECK(v == 0.0);
}

TEST_CASE("single active input") {
  WeightSet w;
  w.w_xr(3, 7) = 1.0;
  std::array<double, kInputCount> x{};
  x[3] = 1.0;
  RnnState n = rnn_step(RnnState{}, x, w);
  CHECK(n.activity[7] == doctest::Approx(0.753978).epsilon(1e-6));
  CHECK(n.activity[7] == doctest::Approx(0.99 * std::tanh(1.0)).epsilon(1e-15));
  CHECK(n.activity[6] == 0.0);
}

TEST_CASE("update matches the scalar reference") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    WeightSet w = decode_genotype(random_genotype(rng, 0.5));
    RnnState s;
    for (double& v : s.activity) v = rng.uniform(-1, 1);
    auto x = random_inputs(rng);
    RnnState n = rnn_step(s, x, w);
    for (int i = 0; i < kHiddenCount; ++i) REQUIRE(n.activity[i] == doctest::Approx(reference_update(s, x, w, i)).epsilon(1e-12));
  }
}

TEST_CASE("diagonal of the recurrent block is inert") {
  Rng rng(7);
  WeightSet w = decode_genotype(random_genotype(rng));
  RnnState s;
  for (double& v : s.activity) v = rng.uniform(-1, 1);
  auto x = random_inputs(rng);
  RnnState a = rnn_step(s, x, w);
  for (int i = 0; i < kHiddenCount; ++i) w.w_rr(i, i) = rng.normal(0, 100.0);
  RnnState b = rnn_step(s, x, w);
  CHECK(a.activity == b.activity);
}

TEST_CASE("activity stays bounded") {
  Rng rng(8);
  WeightSet w = decode_genotype(random_genotype(rng, 5.0));
  RnnState s;
  for (int t = 0; t < 5000; ++t) {
    auto x = random_inputs(rng);
    for (double& v : x) v *= 100.0;
    s = rnn_step(s, x, w);
    for (double v : s.activity) REQUIRE(std::fabs(v) <= 1.0);
  }
}

TEST_CASE("motor output") {
  RobotBody body;
  WeightSet w;
  CHECK(motor_output(RnnState{}, w.output, body) == WheelSpeeds{0.0, 0.0});
  RnnState s;
  s.activity[0] = 1.0;
  w.w_ry(0, 0) = 10.0;
  w.w_ry(0, 1) = -10.0;
  CHECK(motor_output(s, w.output, body) == WheelSpeeds{6.28, -3.14});

  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    for (double& v : s.activity) v = rng.uniform(-1, 1);
    for (double& v : w.output) v = rng.normal(0, 0.1);
    double l = 0.0, r = 0.0;
    for (int j = 0; j < kHiddenCount; ++j) {
      l += s.activity[j] * w.output[j * 2];
      r += s.activity[j] * w.output[j * 2 + 1];
    }
    WheelSpeeds m = motor_output(s, w.output, body);
    REQUIRE(m.left == doctest::Approx(std::clamp(l, -3.14, 6.28)).epsilon(1e-12));
    REQUIRE(m.right == doctest::Approx(std::clamp(r, -3.14, 6.28)).epsilon(1e-12));
    for (double& v : w.output) v *= 100.0;
    WheelSpeeds big = motor_output(s, w.output, body);
    REQUIRE(big.left >= -3.14);
    REQUIRE(big.left <= 6.28);
    REQUIRE(big.right >= -3.14);
    REQUIRE(big.right <= 6.28);
  }
}

TEST_CASE("obstacle avoidance") {
  AvoidanceConfig cfg;
  std::array<double, 8> p{};
  CHECK(obstacle_avoidance(p, cfg) == WheelSpeeds{0.0, 0.0});
  p[2] = 0.79;  // below threshold
  CHECK(obstacle_avoidance(p, cfg) == WheelSpeeds{0.0, 0.0});

  std::array<double, 8> left{};
  left[5] = 0.95;
  left[6] = 0.6;
  WheelSpeeds a = obstacle_avoidance(left, cfg);
  CHECK(a.left > 0.0);
  CHECK(a.right < 0.0);
  CHECK(a.left == -a.right);

  std::array<double, 8> right{};
  right[2] = 0.95;
  WheelSpeeds b = obstacle_avoidance(right, cfg);
  CHECK(b.left < 0.0);
  CHECK(b.right > 0.0);
}

TEST_CASE("symmetric front contact backs the robot off") {
  MazeLayout m;
  m.width = m.height = 2.0;
  m.walls.push_back({{{1.0, 0.0}, {1.0, 2.0}}, Texture::kUniformLight});
  RobotBody body;
  SensorConfig scfg;
  AvoidanceConfig cfg;
  Pose pose{1.0 - body.body_radius - 0.004, 1.0, 0.0};
  auto prox = read_proximity(pose, m, {}, body.body_radius, scfg);
  REQUIRE(prox[0] > cfg.threshold);
  REQUIRE(prox[7] > cfg.threshold);
  CHECK(prox[0] == doctest::Approx(prox[7]));
  WheelSpeeds a = obstacle_avoidance(prox, cfg);
  CHECK(std::fabs(a.left) == doctest::Approx(std::fabs(a.right)));
  WheelSpeeds cmd{std::clamp(a.left, body.min_wheel_speed, body.max_wheel_speed),
                  std::clamp(a.right, body.min_wheel_speed, body.max_wheel_speed)};
  Pose next = step_kinematics(pose, cmd, body, body.control_dt);
  Vec2 contact{1.0, 1.0};
  CHECK(norm(next.position() - contact) > norm(pose.position() - contact));
}

TEST_CASE("ablation targets") {
  Rng rng(10);
  SensorFrame frame;
  for (double& v : frame.values) v = rng.uniform();
  WeightSet w = decode_genotype(random_genotype(rng));

  SUBCASE("none is the identity") {
    SensorFrame f = frame;
    WeightSet ww = w;
    apply_ablation({AblationTarget::kNone}, f, ww, rng);
    CHECK(f.values == frame.values);
    CHECK(ww == w);
  }
  SUBCASE("sensor groups preserve their multiset and nothing else moves") {
    struct Group {
      AblationTarget t;
      int lo, hi;
    };
    for (Group g : {Group{AblationTarget::kProximity, 0, 8}, Group{AblationTarget::kAccelerometer, 8, 11},
                    Group{AblationTarget::kVision, 11, 91}}) {
      SensorFrame f = frame;
      WeightSet ww = w;
      apply_ablation({g.t}, f, ww, rng);
      CHECK(ww == w);
      for (int k = 0; k < kInputCount; ++k)
        if (k < g.lo || k >= g.hi) REQUIRE(f.values[k] == frame.values[k]);
      std::vector<double> a(frame.values.begin() + g.lo, frame.values.begin() + g.hi);
      std::vector<double> b(f.values.begin() + g.lo, f.values.begin() + g.hi);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
  }
  SUBCASE("weight matrices preserve their multiset") {
    for (AblationTarget t : {AblationTarget::kInputWeights, AblationTarget::kRecurrentWeights,
                             AblationTarget::kOutputWeights}) {
      SensorFrame f = frame;
      WeightSet ww = w;
      apply_ablation({t}, f, ww, rng);
      CHECK(f.values == frame.values);
      auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v;
      };
      CHECK(sorted(ww.input) == sorted(w.input));
      CHECK(sorted(ww.recurrent) == sorted(w.recurrent));
      CHECK(sorted(ww.output) == sorted(w.output));
      CHECK(ww != w);
    }
  }
}

TEST_CASE("accelerometer shuffle is uniform over permutations") {
  Rng rng(12);
  WeightSet w;
  std::map<std::array<double, 3>, int> counts;
  const int n = 600000;
  for (int i = 0; i < n; ++i) {
    SensorFrame f;
    f.values[8] = 1;
    f.values[9] = 2;
    f.values[10] = 3;
    apply_ablation({AblationTarget::kAccelerometer}, f, w, rng);
    counts[{f.values[8], f.values[9], f.values[10]}]++;
  }
  CHECK(counts.size() == 6);
  for (const auto& [perm, c] : counts) CHECK(std::fabs(c / double(n) - 1.0 / 6.0) < 0.002);
}

TEST_CASE("ablation names") {
  for (AblationTarget t : kAllAblations) CHECK(parse_ablation(ablation_name(t)) == t);
  CHECK_THROWS_AS(parse_ablation("wings"), Error);
}

TEST_CASE("genotype file round trip") {
  Rng rng(13);
  Genotype g = random_genotype(rng, 1.0);
  g.genes[0] = 1e-300;
  g.genes[1] = -0.1;
  std::string text = serialize_genotype(g);
  CHECK(text.rfind("tmaze-genotype v1 7150\n", 0) == 0);
  CHECK(parse_genotype(text) == g);
  CHECK(genotype_hash(parse_genotype(text)) == genotype_hash(g));
  Genotype h = g;
  h.genes[7149] += 1e-12;
  CHECK(genotype_hash(h) != genotype_hash(g));
}

TEST_CASE("genotype file errors") {
  auto code_of = [](std::string text) {
    try {
      parse_genotype(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  CHECK(code_of("") == ErrorCode::kParse);
  CHECK(code_of("tmaze-genotype v1 7100\n") == ErrorCode::kBadLength);
  CHECK(code_of("tmaze-genotype v1 7150\n1\n2\n") == ErrorCode::kBadLength);
  std::string bad = serialize_genotype(Genotype::zeros());
  bad.replace(bad.find("\n0\n") + 1, 1, "x");
  CHECK(code_of(bad) == ErrorCode::kParse);
  std::string inf = serialize_genotype(Genotype::zeros());
  inf.replace(inf.find("\n0\n") + 1, 1, "inf");
  CHECK(code_of(inf) == ErrorCode::kParse);
}
